//! Library error type.

use std::path::PathBuf;

/// Errors surfaced by corpus ingestion, index persistence and retrieval
/// configuration. Callers that need process exit codes can branch on the
/// variant: configuration/input problems are recoverable user errors, while
/// `IndexFormat` means a stored index cannot be trusted.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus shape error: {0}")]
    CorpusShape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index format error: {0}")]
    IndexFormat(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
