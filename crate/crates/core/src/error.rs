use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("word `{0}` is not in the vocabulary")]
    UnknownWord(String),

    #[error("id {id} is out of range for a vocabulary of {len} entries")]
    UnknownId { id: usize, len: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("cosine is undefined for a zero vector ({0})")]
    ZeroVector(String),

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("training produced a non-finite value at pair {index}")]
    NonFinite { index: usize },

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::Parameter(message.into())
    }
}

/// Tags an error with the pipeline stage it came from.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| match source {
            Error::Stage { .. } => source,
            source => Error::Stage {
                stage,
                source: Box::new(source),
            },
        })
    }
}
