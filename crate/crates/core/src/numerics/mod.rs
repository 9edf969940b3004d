//! Dense linear algebra and random variate generation.

pub mod linalg;
pub mod matrix;
pub mod random;
pub mod special;

pub use linalg::{cholesky_decompose, log_det_from_cholesky, solve_lower, trace_quadratic};
pub use matrix::{DenseMatrix, LowerTriangularMatrix, SymmetricMatrix};
pub use random::{
    sample_dirichlet, sample_mvn_zero, sample_truncated_normal, sample_truncated_normal_interval,
    sample_truncated_poisson, sample_truncated_wrapped_exponential, RngStream,
};
