use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("index is empty")]
    EmptyIndex,

    #[error("feature set is empty")]
    EmptyFeatureSet,

    #[error("candidate pool is empty")]
    EmptyPool,

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("expected {expected} targets, got {actual}")]
    TargetCount { expected: usize, actual: usize },

    #[error("malformed model `{0}`")]
    Model(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
