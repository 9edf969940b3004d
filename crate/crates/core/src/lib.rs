//! Bayesian clustering of correlated variables.
//!
//! A correlation matrix is reparameterized through the hyperspherical angles of
//! its Cholesky factor. Block-diagonal matrices with equicorrelated blocks are
//! then described by one pivotal angle per block, and a reversible-jump sampler
//! explores the cluster count, the variable-to-cluster assignment and the
//! angles jointly.
//!
//! Modules, bottom-up:
//!
//! * [`numerics`]: dense kernels (Cholesky, triangular solves) and the random
//!   variate generators the prior hierarchy needs.
//! * [`angles`]: the angle <-> correlation bijection and the pivotal-angle
//!   expansion for block structures.
//! * [`model`]: data container, model state, likelihood and priors.
//! * [`sampler`]: the RJMCMC kernels, chain driver and posterior summaries.
//! * [`simgen`]: synthetic data generators and the recovery score.
//! * [`baselines`]: K-means, PAM and agglomerative clustering of variables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
pub mod baselines;
pub mod error;
pub mod model;
pub mod numerics;
pub mod sampler;
pub mod simgen;

pub use error::{Error, Result};
