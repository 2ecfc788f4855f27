use thiserror::Error;

use crate::rule::ParseError;

pub type Result<T> = std::result::Result<T, QvoteError>;

/// Every failure the simulator can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QvoteError {
    #[error("state is not normalized: squared norm {norm_sq}")]
    Normalization { norm_sq: f64 },

    #[error("{qubits} qubits exceeds the configured cap of {cap}")]
    Capacity { qubits: usize, cap: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numerical corruption: {0}")]
    NumericalCorruption(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("arity error: {0}")]
    Arity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("protocol error: {0}")]
    Protocol(String),
}

impl QvoteError {
    /// True for errors caused by floating-point state drifting out of its
    /// invariants rather than by bad user input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, QvoteError::NumericalCorruption(_))
    }
}
