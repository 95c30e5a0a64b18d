use std::path::Path;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input; `file` and `row` locate the offending record.
    #[error("{file}:{row}: {message}")]
    Parse { file: String, row: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("disconnected request {0}: destination is unreachable from origin")]
    DisconnectedRequest(u64),

    #[error("invalid request {id}: {reason}")]
    InvalidRequest { id: u64, reason: String },

    #[error("unknown road node {0}")]
    UnknownNode(u64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid graph dump: {0}")]
    Dump(String),

    #[error("relaxation has a fractional optimum on edges {edges:?}")]
    FractionalRelaxation { edges: Vec<usize> },

    #[error("linear program failed: {0}")]
    Solver(String),
}

impl Error {
    pub fn parse(file: impl Into<String>, row: u64, message: impl Into<String>) -> Self {
        Error::Parse { file: file.into(), row, message: message.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn from_csv(file: &str, err: csv::Error) -> Self {
        let row = err.position().map(|p| p.line()).unwrap_or(0);
        let message = match err.kind() {
            csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
            _ => err.to_string(),
        };
        Error::parse(file, row, message)
    }
}
