//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Rejection sampling exhausted its attempt budget.
    #[error("ensemble sampling failed: {0}")]
    Ensemble(String),

    /// A dense linear-algebra routine failed or lost accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A metric is undefined for the given data (zero targets, constant vectors).
    #[error("metric undefined: {0}")]
    Metric(String),

    /// A file did not match the expected schema.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
