use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the decomposition and forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: need at least {required} samples, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("insufficient extrema for envelope construction ({maxima} maxima, {minima} minima)")]
    InsufficientExtrema { maxima: usize, minima: usize },

    #[error("noise decomposition exhausted at stage {stage}: no trial produced a mode")]
    StageCollapse { stage: usize },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("empty file: {0}")]
    EmptyFile(PathBuf),

    #[error("non-uniform sampling at row {row}: gap of {gap_minutes} min exceeds the fill tolerance")]
    NonUniformInterval { row: usize, gap_minutes: f64 },

    #[error("malformed input at row {row}: {message}")]
    MalformedInput { row: usize, message: String },

    #[error("horizon too long: window of {window} samples does not fit in {available}")]
    HorizonTooLong { window: usize, available: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    DivergedTraining { epoch: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("too few rows: need at least {required}, got {actual}")]
    TooFewRows { required: usize, actual: usize },

    #[error("need at least {required} runs per method for a significance test, got {actual}")]
    InsufficientRuns { required: usize, actual: usize },

    #[error("{context}: {source}")]
    RunFailed {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported checkpoint: {0}")]
    Checkpoint(String),

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
