use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain must have at least one coordinate")]
    EmptyDomain,

    #[error("alphabet for coordinate {coord} is invalid: {reason}")]
    InvalidAlphabet { coord: usize, reason: String },

    #[error("state space has {count} states, above the enumeration cap of {cap}")]
    EnumerationCap { count: String, cap: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value {value} is not a level of coordinate {coord}")]
    NotInAlphabet { coord: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("TSPLIB parse error at line {line}: {reason}")]
    Tsplib { line: usize, reason: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("infeasible state: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
