//! Error type shared across the library.

/// Errors produced by the estimation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid argument or precondition violation.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Matrix/vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A computation failed numerically.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The stationarity conditions of a reported solution are violated
    /// beyond tolerance.
    #[error("KKT violation: {0}")]
    Kkt(String),
    /// Input is degenerate for the requested operation.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A matrix required to be positive definite is not.
    #[error("matrix not positive definite: {0}")]
    NotSpd(String),
    /// The group covariance block is too ill-conditioned for the classical
    /// Wald statistic; the trace-normalized statistic remains available.
    #[error(
        "group covariance block is numerically singular (condition number {cond:.3e}); \
         use the trace-normalized test instead"
    )]
    SingularGroupCov { cond: f64 },
    /// An internal cross-check between two equivalent computations failed.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
