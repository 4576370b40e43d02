//! Shared error type for the audit engine.

use thiserror::Error;

/// Errors produced by dataset handling, estimators, and audit runs.
///
/// Variants distinguish caller mistakes (bad schema, bad config values,
/// malformed input files) from data conditions the engine refuses to
/// estimate on (too few rows, degenerate inputs). Soft, per-attribute
/// conditions are *not* errors; they surface as warnings on the results.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error: {0}")]
    Csv(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, AuditError>;
