use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("insufficient samples: need at least {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("year {year} outside window {start}..={end}")]
    YearOutOfWindow { year: i32, start: i32, end: i32 },

    #[error("no edge produced a valid estimate ({attempted} attempted): {last}")]
    NoValidEdges { attempted: usize, last: String },

    #[error("failure matrix of {bits} bits exceeds budget of {budget} bits")]
    BitBudget { bits: u128, budget: u128 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
