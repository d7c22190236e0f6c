use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    /// A quantity that must be non-negative came out negative beyond round-off.
    #[error("numerical consistency: {0}")]
    Consistency(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("support truncation: grid captures only {norm:.6} of the norm")]
    SupportTruncation { norm: f64 },
    #[error("boundary leak: |psi| = {amplitude:.3e} at the grid edge")]
    BoundaryLeak { amplitude: f64 },
}
