//! Error contract shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },

    #[error("coordinate index {index} outside dimension {dim}")]
    DimensionExceeded { index: usize, dim: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("norm is irrational in exact mode: {0}")]
    InexactNorm(String),

    #[error("no norming family is declared for {0}")]
    NotNorming(&'static str),

    #[error("functional violates its dual norm bound: {0}")]
    FunctionalOutOfBall(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "budget exhausted after {} block(s) of {requested} requested (frontier {frontier})",
        blocks.len()
    )]
    BudgetExhausted {
        blocks: Vec<Vec<usize>>,
        requested: usize,
        frontier: usize,
    },

    #[error("enumeration too large: length {len} exceeds cap {cap}")]
    EnumerationTooLarge { len: usize, cap: usize },

    #[error("coefficient value at index {index} is not determined (sampled prefix ends at {len})")]
    CoefficientsUnavailable { index: usize, len: usize },

    #[error("oracle does not cover {predicate} for {family} with these coefficients")]
    OracleIncomplete { family: String, predicate: String },
}

pub type Result<T> = std::result::Result<T, LabError>;
