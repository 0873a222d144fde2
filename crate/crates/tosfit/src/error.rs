//! Error taxonomy shared by the whole crate.

use thiserror::Error;

/// Errors surfaced by model construction, inference and run loops.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid static configuration (dimensions, ranges, hyperparameters).
    #[error("configuration error: {0}")]
    Config(String),

    /// Vector or matrix dimension mismatch.
    #[error("shape error: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// Invalid runtime input (non-finite values, simplex violations).
    #[error("input error: {0}")]
    Input(String),

    /// Operation not valid for the current state (e.g. no observations yet).
    #[error("state error: {0}")]
    State(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Domain too large to enumerate.
    #[error("enumeration error: {0}")]
    Enumeration(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
