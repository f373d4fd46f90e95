use std::path::PathBuf;

use thiserror::Error;

use crate::rank_stats::SkippedCell;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A row that could not be parsed under the declared schema.
    #[error("{origin}:{line}: parse error: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    /// A row that parsed but violates a data-model invariant.
    #[error("{origin}:{line}: invalid row: {message}")]
    Validation {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {left} != {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("at least 2 observations are required, got {0}")]
    TooFewObservations(usize),

    #[error("missing human score for {0}")]
    MissingHumanScore(String),

    #[error("no defined correlation cells ({} skipped)", skipped.len())]
    NoDefinedCells { skipped: Vec<SkippedCell> },

    #[error("estimates `{0}` and `{1}` share no scored cells")]
    NoCommonCoverage(String, String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
