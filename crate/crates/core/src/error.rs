use thiserror::Error;

/// Errors raised by dataset, distribution and mechanism operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("enumeration capacity exceeded: {required} > {limit}")]
    Capacity { required: u128, limit: u128 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, DpError>;
