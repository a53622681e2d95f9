use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("unknown analyte `{0}`")]
    Lookup(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("holdout hygiene violation: {0}")]
    Hygiene(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config/validation, 3 data/parse, 4 numeric/training.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Schedule(_)
            | Error::Range(_)
            | Error::Dimension(_)
            | Error::Capacity(_)
            | Error::Lookup(_) => 2,
            Error::Parse { .. }
            | Error::Data(_)
            | Error::Degenerate(_)
            | Error::Hygiene(_)
            | Error::Io { .. } => 3,
            Error::Numeric(_) | Error::Training { .. } | Error::Overflow(_) => 4,
        }
    }
}
