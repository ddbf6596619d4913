use std::fmt;

/// Errors produced by ingestion, the neighborhood phases, training and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Domain { line: usize, message: String },

    #[error("line {line}: unknown node `{name}`")]
    UnknownNode { line: usize, name: String },

    #[error("nodes {from} and {to} are not adjacent")]
    NotAnEdge { from: usize, to: usize },

    #[error("shape mismatch: {0}")]
    Structure(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training diverged: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl fmt::Display) -> Self {
        Error::Config(msg.to_string())
    }

    pub(crate) fn structure(msg: impl fmt::Display) -> Self {
        Error::Structure(msg.to_string())
    }
}
