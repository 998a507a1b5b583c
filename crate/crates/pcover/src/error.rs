//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set mismatch: {0}")]
    GroundMismatch(String),

    #[error("instance too large for guard '{guard}': {detail}")]
    TooLarge { guard: &'static str, detail: String },

    #[error("probability out of range: {0}")]
    BadProbability(String),

    #[error("negative weight: {0}")]
    NegativeWeight(String),

    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("bijection violated: {0}")]
    BijectionViolated(String),

    #[error("cover element not pruned: {0}")]
    UnprunedCover(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
