use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: no blank line separating headers from body")]
    MissingBodySeparator { path: PathBuf },

    #[error("empty query")]
    EmptyQuery,

    #[error("unknown ranking method `{0}` (valid: {valid})", valid = crate::ranker::Method::NAMES.join(", "))]
    UnknownMethod(String),

    #[error("K must be at least 1, got {0}")]
    InvalidCutoff(usize),

    #[error("query `{0}` has no relevance judgments")]
    UnjudgedQuery(String),

    #[error("{path}:{line}: {msg}")]
    Format { path: PathBuf, line: usize, msg: String },

    #[error("store file {path}: {msg}")]
    Store { path: PathBuf, msg: String },

    #[error("index inconsistency: {0}")]
    Inconsistent(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }
}
