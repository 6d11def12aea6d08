use thiserror::Error;

/// Errors produced by construction, solving and analysis routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument is outside the documented domain (e.g. `n = 0`).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Structurally malformed data (index out of range, length mismatch).
    #[error("structural error: {0}")]
    Structural(String),

    /// A documented precondition of the called operation does not hold.
    #[error("precondition not satisfied: {0}")]
    Precondition(String),

    /// An enumeration would exceed the configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A condition that should be impossible for valid inputs; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
