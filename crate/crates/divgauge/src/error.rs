//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DivError {
    /// An argument fell outside the mathematical domain of an operation
    /// (non-positive density ratio, test-function value outside dom(f*), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative numerical procedure failed to reach its tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// A covariance matrix was not symmetric positive-definite.
    #[error("factorization error: {0}")]
    Factorization(String),

    /// A binary file did not match its documented layout.
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Training produced NaN objectives on consecutive evaluations.
    #[error("diverged: {0}")]
    Diverged(String),

    /// A ratio check was requested with a near-zero denominator.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Config file could not be parsed.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, DivError>;
