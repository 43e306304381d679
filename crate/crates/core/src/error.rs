use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-normalizable: exponent must exceed 1 (got {0})")]
    NonNormalizable(f64),

    #[error("degenerate tail: fewer than two distinct values at or above x_min = {x_min}")]
    DegenerateTail { x_min: u64 },

    #[error("empty tail: no observations at or above x_min = {x_min}")]
    EmptyTail { x_min: u64 },

    #[error("insufficient tail: no candidate x_min leaves at least {min_tail} observations")]
    InsufficientTail { min_tail: usize },

    #[error("stale fit: stored KS {stored} differs from recomputed KS {recomputed}")]
    StaleFit { stored: f64, recomputed: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no size variation: all regression sizes are equal")]
    NoSizeVariation,

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("anonymous record `{0}`")]
    AnonymousRecord(String),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("empty mapping")]
    EmptyMapping,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
