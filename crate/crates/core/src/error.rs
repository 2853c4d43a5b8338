//! Error type shared by every solver in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or solver parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Matrix or tensor shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// The Liouvillian kernel is not one-dimensional, so "the" steady state
    /// is ill-defined. `dim` is the detected kernel dimension.
    #[error("degenerate steady state: Liouvillian kernel dimension is {dim}")]
    DegenerateSteadyState { dim: usize },

    /// An analytic expression was requested outside the regime where it is
    /// defined (e.g. the incommensurate dark-state drive at zero feedback
    /// phase).
    #[error("undefined regime: {0}")]
    UndefinedRegime(String),

    /// A numerical check failed (residuals, positivity, convergence, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Raw LAPACK/BLAS failure bubbled up from the backend.
    #[error("linear algebra backend: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// A checkpoint file is malformed or from an incompatible version.
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
}
