use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The queried region has no points.
    #[error("region is empty")]
    EmptyRegion,

    #[error("rate ledger violation: {0}")]
    Ledger(String),

    /// Key generation was requested on a chain whose jamming power is zero.
    #[error("no induced source: jamming power of the selected chain is zero")]
    SourceAbsent,

    #[error("exact computation too large: {terms:.3e} elementary terms exceeds the limit of {limit:.0e}")]
    GuardExceeded { terms: f64, limit: f64 },

    #[error("value {value} out of range [0, {modulus})")]
    OutOfRange { value: u64, modulus: u64 },

    #[error("malformed channel description: {0}")]
    Spec(String),
}
