use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid bit character {0:?}; expected '0' or '1'")]
    InvalidBit(char),

    #[error("sequence length {len} exceeds the supported maximum of {max}")]
    TooLong { len: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pattern violates burst definition: {0}")]
    IllegalPattern(String),

    #[error("position {position} out of range for length {len}")]
    OutOfRange { position: usize, len: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("exceeds exhaustive budget: {what} (limit {limit})")]
    BudgetExceeded { what: String, limit: usize },

    #[error("message {msg} out of range (count {count})")]
    MessageOutOfRange { msg: u128, count: u128 },

    #[error("syndrome not separating: h collides with a neighbour")]
    NotSeparating,

    #[error("no candidate")]
    NoCandidate,

    #[error("ambiguous: {0} candidates")]
    Ambiguous(usize),

    #[error("undecodable: {0}")]
    Undecodable(String),

    #[error("ambiguity, construction violation: {0} distinct survivors")]
    ConstructionViolation(usize),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
