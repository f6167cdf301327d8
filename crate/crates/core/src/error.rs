use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A 64-bit coordinate or area computation overflowed.
    #[error("precision exceeded: {0}")]
    PrecisionExceeded(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("time limit reached before a result was found")]
    TimeLimit,

    #[error("no reference data for {family} n={n}")]
    UnknownReference { family: String, n: usize },

    #[error("internal error: {0}")]
    Internal(String),
}
