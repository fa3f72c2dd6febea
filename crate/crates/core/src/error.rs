//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // The source is not repeated in the message; chain printers add it.
    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate {kind} key: {key}")]
    DuplicateKey { kind: &'static str, key: String },

    #[error("{kind} {key} references unknown {target_kind} {target_key}")]
    ForeignKey {
        kind: &'static str,
        key: String,
        target_kind: &'static str,
        target_key: String,
    },

    #[error(
        "score {score} out of range [{min}, {max}] for dimension {dimension} \
         (evaluator {evaluator_id}, idea {idea_id})"
    )]
    ScoreOutOfRange {
        evaluator_id: String,
        idea_id: String,
        dimension: String,
        score: i64,
        min: i64,
        max: i64,
    },

    #[error("{field} must be non-empty on {kind} {key}")]
    EmptyField {
        kind: &'static str,
        key: String,
        field: &'static str,
    },

    #[error("invalid rubric: {0}")]
    Rubric(String),

    #[error("rating matrix: {0}")]
    Matrix(String),

    #[error("insufficient pairable data: no unit has at least 2 ratings")]
    InsufficientPairableData,

    #[error("degenerate series: {0}")]
    DegenerateSeries(&'static str),

    #[error("cosine similarity undefined for a zero vector")]
    ZeroVector,

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least 2 shared items, found {found}")]
    InsufficientSharedItems { found: usize },

    #[error(
        "insufficient conditioning pool: requested {requested} examples \
         but only {available} available (short by {shortfall})"
    )]
    InsufficientPool {
        requested: usize,
        available: usize,
        shortfall: usize,
    },

    #[error("no JSON object found in judge output")]
    NoJson,

    #[error("judge output is missing key {0:?}")]
    MissingKey(&'static str),

    #[error("judge score {score} outside the {dimension} scale [{min}, {max}]")]
    ScoreOutsideScale {
        dimension: String,
        score: f64,
        min: i64,
        max: i64,
    },

    #[error("judge score {0} is not an integer")]
    NonIntegralScore(f64),

    #[error("judge confidence {0} is not an integer in [0, 100]")]
    InvalidConfidence(f64),

    #[error("no surviving prediction after confidence filtering")]
    NoSurvivingPrediction,

    #[error("replay cache miss for key {key}")]
    ReplayMiss { key: String },

    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },

    #[error("fewer than 2 qualifying evaluator pairs ({found})")]
    NoQualifyingPairs { found: usize },

    #[error("missing run artifact: {0}")]
    MissingArtifact(PathBuf),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
