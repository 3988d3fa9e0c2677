use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("nothing to fit")]
    NothingToFit,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid run `{id}`: {reason}")]
    InvalidRun { id: String, reason: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("AE must train on normal data only")]
    AnomalousTrainingData,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("too few runs: need at least {needed}, got {got}")]
    TooFewRuns { needed: usize, got: usize },

    #[error("AUC-PR undefined: no positive labels")]
    NoPositives,

    #[error("no subtle anomalies in the evaluated set")]
    NoSubtleAnomalies,

    #[error("harmonic number undefined for m = 0")]
    HarmonicUndefined,

    #[error("csv schema mismatch in {path}: {reason}")]
    CsvSchema { path: String, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
