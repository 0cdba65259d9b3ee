use thiserror::Error;

/// Errors raised by the library. Every variant is a rejected precondition or
/// an input that cannot be processed; nothing here is recoverable by retrying.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("range ({lo}, {hi}] is reversed")]
    ReversedRange { lo: f64, hi: f64 },

    #[error("sieve bound {requested} exceeds the configured maximum {max}")]
    SieveLimit { requested: u64, max: u64 },

    #[error("set membership is only known on ({lo}, {hi}], but {needed} is required")]
    Coverage { lo: u64, hi: u64, needed: u64 },

    #[error("enumeration of {requested} terms exceeds the cap of {cap}")]
    EnumerationCap { requested: u128, cap: u128 },

    #[error("truncation prime {trunc} is below the exact-regime threshold {required}")]
    Truncation { trunc: u64, required: u64 },

    #[error("validity condition violated: {0}")]
    Validity(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidArgument(msg.into())
}
