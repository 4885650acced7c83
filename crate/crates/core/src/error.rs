use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("label {0} is not in {{-1, +1}}")]
    InvalidLabel(f64),

    #[error("step mismatch: buffer has seen {seen} points, got step {step}")]
    StepMismatch { seen: usize, step: usize },

    #[error("buffer policy is {actual}, operation requires {expected}")]
    PolicyMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("no pairs")]
    NoPairs,

    #[error("empty buffer")]
    EmptyBuffer,

    #[error("stream too short: need at least {need} points, got {got}")]
    StreamTooShort { need: usize, got: usize },

    #[error("empty trace")]
    EmptyTrace,

    #[error("trace is missing buffer snapshots")]
    MissingSnapshots,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("AUC undefined: test set needs both a positive and a negative point")]
    AucUndefined,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
