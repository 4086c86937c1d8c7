use std::io;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("bad magic")]
    BadMagic,

    #[error("unsupported cache version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("malformed cache: {0}")]
    MalformedCache(String),

    #[error("matrix is numerically rank deficient at component {index} (singular value ratio {ratio:e})")]
    RankDeficient { index: usize, ratio: f64 },

    #[error("row for word {word:?} has zero norm")]
    ZeroNorm { word: String },

    #[error("{what} index {index} out of range (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown word {0:?}")]
    UnknownWord(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

/// Validates `index < size`, naming the kind of index in the error.
pub(crate) fn check_index(what: &'static str, index: usize, size: usize) -> Result<()> {
    if index < size {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { what, index, size })
    }
}
