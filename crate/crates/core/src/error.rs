//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two words that must have equal length do not.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The requested computation exceeds a hard enumeration budget.
    #[error("problem size exceeds budget: {0}")]
    Capacity(String),

    /// Inputs are individually valid but mutually inconsistent.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    /// A generator or parity-check matrix fails a structural check.
    #[error("invalid code: {0}")]
    InvalidCode(String),

    /// The ARQ loop exceeded its retransmission cap without delivering a word.
    #[error("retransmission cap of {cap} attempts exceeded")]
    RunawayChannel { cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}
