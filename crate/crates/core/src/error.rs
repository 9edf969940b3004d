use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("singular triangular matrix (diagonal entry {index} = {value:e})")]
    SingularMatrix { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate Cholesky row {row}: sine product underflowed at column {col}")]
    DegenerateRow { row: usize, col: usize },

    #[error("within-block angle recursion left [0, pi) in block {block}")]
    UnsatisfiableAngle { block: usize },

    #[error("value outside prior support: {0}")]
    OutOfSupport(String),

    #[error("invalid model state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trace contains no kept iterations")]
    EmptyTrace,

    #[error("design produced a non positive definite covariance after {attempts} redraws")]
    DegenerateDesign { attempts: usize },

    #[error("label vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
