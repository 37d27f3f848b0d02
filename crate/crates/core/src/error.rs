use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported threshold: {0}")]
    UnsupportedThreshold(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("capacity exceeded: {n} sites exceeds the enumeration cap of {cap}")]
    CapacityExceeded { n: usize, cap: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
