use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{column}` in {context}")]
    MissingColumn { column: String, context: String },
    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: u64 },
    #[error("duplicate entry for user {user_id}, question {question_id}")]
    DuplicatePair { user_id: u64, question_id: u64 },
    #[error("optimisation diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn row(row: usize, message: impl Into<String>) -> Self {
        Error::InvalidRow { row, message: message.into() }
    }
}
