use thiserror::Error;

/// Errors produced by model construction and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside the domain an operation is defined on
    /// (e.g. a miscoverage level outside (0, 1), a non-positive sharpness).
    #[error("domain error: {0}")]
    Domain(String),

    /// A poll, outcome space, distribution, or joint model failed its
    /// structural invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An outcome label was not part of the relevant outcome space.
    #[error("unknown outcome label `{0}`")]
    UnknownOutcome(String),

    /// A data value was not part of the model's data space.
    #[error("unknown data value {0}")]
    UnknownDataValue(u64),

    /// Exact enumeration was requested on a model with too many
    /// (data value, outcome) pairs.
    #[error("enumeration too large: {pairs} (x, y) pairs exceeds the limit of {limit}")]
    EnumerationTooLarge { pairs: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
