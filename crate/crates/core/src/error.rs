use thiserror::Error;

/// Errors raised by the optimization toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feasible set is empty: {0}")]
    EmptySet(String),

    #[error("projection did not converge within {iterations} iterations (residual {residual:e})")]
    ProjectionNotConverged { iterations: usize, residual: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("objective has no subgradient rule")]
    MissingSubgradient,

    #[error("unsupported feasible set for this operation: {0}")]
    UnsupportedSet(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
