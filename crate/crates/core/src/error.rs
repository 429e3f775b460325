//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    /// An input violated a documented precondition (e.g. `z` not in the cone,
    /// `lambda` not in the normal cone).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative routine did not reach its tolerance within its cap.
    #[error("numerical failure in {what}: residual {residual:.3e}")]
    Numerical { what: String, residual: f64 },

    /// A desk-scale cap was exceeded (face count, polynomial degree, ...).
    #[error("capability limit: {0}")]
    Capability(String),

    #[error("no Lagrange multipliers: {0}")]
    NoMultipliers(String),

    /// Two routes that must agree disagreed beyond tolerance.
    #[error("internal consistency: {0}")]
    Inconsistent(String),

    #[error("invalid cone data: {0}")]
    InvalidCone(String),

    #[error("invalid problem file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dim(context: &str, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            context: context.to_string(),
            expected,
            got,
        }
    }
}
