use thiserror::Error;

/// Error type shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Arithmetic failures such as division by zero.
    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    /// Structural misuse: mismatched indeterminate lists, non-square
    /// matrices, duplicate interpolation nodes, and the like.
    #[error("structural error: {0}")]
    Structure(String),

    /// Invalid caller-supplied parameters.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An identity the toolkit is supposed to certify failed to hold.
    #[error("verification error: {0}")]
    Verification(String),

    /// det B(r) = 0: the parallel family hit a focal point.
    #[error("focal point: {0}")]
    Focal(String),

    /// Numerical failure (degenerate frame, ill-conditioned solve, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A group element could not be constructed or failed its residual check.
    #[error("construction error: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
