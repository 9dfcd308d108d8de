use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the trust engine, loaders and report writers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("unknown node id {0}")]
    UnknownNode(u64),

    #[error("series `{name}` has {xs} x values but {ys} y values")]
    SeriesLength { name: String, xs: usize, ys: usize },

    #[error("scenario: {0}")]
    Scenario(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter { name, message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
