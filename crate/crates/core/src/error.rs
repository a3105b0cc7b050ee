use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),

    #[error("cannot step: {0}")]
    Usage(String),

    #[error("task generation failed after {attempts} attempts (seed {seed})")]
    Generation { seed: u64, attempts: usize },

    #[error("brute-force reachability refused: {states} states x {branches} action sequences exceeds the budget of {budget}")]
    TooLarge {
        states: u64,
        branches: u64,
        budget: u64,
    },

    #[error("cannot fit classifier: {0}")]
    Fit(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
