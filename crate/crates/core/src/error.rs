use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no training signal: the store has no preprint whose DOI resolves to a unique published record")]
    NoTrainingSignal,

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("unsupported model schema version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },

    #[error("too few DOI-matched pairs for evaluation: {found} < {required}")]
    TooFewPairs { found: usize, required: usize },

    #[error("unknown preprint {0}")]
    UnknownPreprint(String),

    #[error("store is locked by another process ({0})")]
    Locked(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Validation(_) => "validation",
            Error::Integrity(_) => "integrity",
            Error::Precondition(_) => "precondition",
            Error::NoTrainingSignal => "no_training_signal",
            Error::InvalidHyperparameter(_) => "invalid_hyperparameter",
            Error::SchemaVersion { .. } => "schema_version",
            Error::TooFewPairs { .. } => "too_few_pairs",
            Error::UnknownPreprint(_) => "unknown_preprint",
            Error::Locked(_) => "locked",
        }
    }
}
