use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed algebra document: {0}")]
    Format(String),

    #[error("operation `{symbol}`: table length {len} ≠ {size}^{arity}")]
    TableLength {
        symbol: String,
        len: usize,
        size: usize,
        arity: usize,
    },

    #[error("operation `{symbol}`: entry {value} at index {index} is outside 0..{size}")]
    EntryOutOfRange {
        symbol: String,
        index: usize,
        value: i64,
        size: usize,
    },

    #[error("element {element} is outside the universe 0..{size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("cannot parse relation: {0}")]
    Notation(String),

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("relations live on different universes ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("not a tolerance: {0}")]
    NotTolerance(String),

    #[error("not a congruence: {0}")]
    NotCongruence(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    /// A configured bound was hit. This is an outcome, never a truncated result.
    #[error("resource bound exceeded: {what} (limit {limit})")]
    ResourceExhausted { what: String, limit: usize },
}

impl Error {
    pub fn exhausted(what: impl Into<String>, limit: usize) -> Self {
        Error::ResourceExhausted {
            what: what.into(),
            limit,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Error::ResourceExhausted { .. })
    }
}
