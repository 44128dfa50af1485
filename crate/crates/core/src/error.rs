use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max |M_ij - M_ji| = {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unknown block label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate block label `{0}`")]
    DuplicateLabel(String),

    #[error("block sizes sum to {total}, expected {dim}")]
    PartitionSizeMismatch { total: usize, dim: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("covariance matrix violates the uncertainty relation (min symplectic eigenvalue {min_nu:.6})")]
    InvalidQcm { min_nu: f64 },

    #[error("operation requires a covariance matrix strictly above the uncertainty bound (min symplectic eigenvalue {min_nu:.6})")]
    NotStrictlyValid { min_nu: f64 },

    #[error("optimizer failure: {0}")]
    Optimizer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
