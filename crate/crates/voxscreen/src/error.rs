//! Error type shared across the pipeline.

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed container or unparseable field.
    #[error("parse error: {0}")]
    Parse(String),

    /// The container is valid but the codec is not supported.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// A WAV file with a zero-length data chunk.
    #[error("empty audio: {0}")]
    EmptyAudio(String),

    /// Caller passed an out-of-domain argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The signal is too short for the requested analysis.
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    /// No voiced frames were found where voiced speech is required.
    #[error("no voiced speech: {0}")]
    NoVoicedSpeech(String),

    /// Fewer period marks than the perturbation statistic needs.
    #[error("insufficient periods: need {needed}, got {got}")]
    InsufficientPeriods { needed: usize, got: usize },

    /// Close-returns search found no recurrence in the embedded signal.
    #[error("no recurrence found in phase space")]
    NoRecurrence,

    /// Oversampling is impossible (minority class too small).
    #[error("cannot oversample: {0}")]
    CannotOversample(String),

    /// CSV or JSON schema does not match the expected layout.
    #[error("schema error: {0}")]
    Schema(String),

    /// Training labels contain a single class.
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// Metric is undefined for the given inputs (e.g. AUC with one class).
    #[error("undefined metric: {0}")]
    Undefined(String),

    /// Model lacks the statistics an operation requires.
    #[error("model unsupported: {0}")]
    ModelUnsupported(String),

    /// Exhaustive enumeration would be too large.
    #[error("too large: {0}")]
    TooLarge(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
