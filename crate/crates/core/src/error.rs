use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs disagree with the declared configuration (missing columns,
    /// unknown variables, mismatched formats).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("validation error at row {row} ({word}): {message}")]
    Validation {
        row: usize,
        word: String,
        message: String,
    },

    #[error("alignment of {left} and {right} is empty")]
    EmptyAlignment { left: String, right: String },

    /// A caller broke an operation's precondition (shapes, sizes, ranges).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("training diverged at iteration {iteration}: loss is {loss}")]
    Divergence { iteration: usize, loss: f64 },

    #[error("no words left to rate after exclusion")]
    EmptyOutput,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
