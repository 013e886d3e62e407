use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("inconsistent dimension at line {line}: expected {expected}, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("zero vector for '{0}' cannot be normalized")]
    ZeroVector(String),

    #[error("empty store")]
    EmptyStore,

    #[error("word not in vocabulary: '{0}'")]
    OutOfVocabulary(String),

    #[error("unsupported language: '{0}'")]
    UnsupportedLanguage(String),

    #[error("empty vocabulary after cutoff")]
    EmptyVocabulary,

    #[error("empty constraint set")]
    EmptyConstraints,

    #[error("invalid training configuration: {0}")]
    Config(String),

    #[error("insufficient coverage: {covered} of {total} pairs in vocabulary")]
    InsufficientCoverage { covered: usize, total: usize },

    #[error("spearman: {0}")]
    Correlation(String),

    #[error("invalid rule: {0}")]
    Rule(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
