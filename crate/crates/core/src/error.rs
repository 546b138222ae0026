use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported Hermite degree {degree} (maximum {max})")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("unsupported rule size {size} (allowed 1..={max})")]
    UnsupportedSize { size: usize, max: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("function evaluation failed: {0}")]
    Evaluation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Gram matrix is ill-conditioned (estimated condition number {condition:.3e})")]
    Conditioning { condition: f64 },

    #[error("squared worst-case error {value:.3e} is negative beyond round-off")]
    NegativeSquaredError { value: f64 },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("insufficient data: {needed} valid points required, {got} given")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
