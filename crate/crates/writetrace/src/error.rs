//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parsing, training, scoring, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// A session-log line could not be parsed.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A session failed replay validation.
    #[error("session {session_id}: event {event_index}: {rule}")]
    InvalidSession {
        session_id: String,
        event_index: usize,
        rule: String,
    },

    /// Input data violates an operation precondition.
    #[error("{0}")]
    InvalidInput(String),

    /// A row does not match the model's feature schema.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// A model file is unreadable or has an unsupported version.
    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
