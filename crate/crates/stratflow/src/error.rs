//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("iterate blew up at step {step} (|x| = {norm:.3e})")]
    BlowUp { step: usize, norm: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("min-norm-point solver stalled after {iterations} iterations (gap {gap:.3e})")]
    SolverStall { iterations: usize, gap: f64 },

    #[error("sphere projection undefined at the center")]
    ProjectionAtCenter,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no stratum qualifies at step {step}; step sizes are too large for the tube radii")]
    NoQualifyingStratum { step: usize },

    #[error("stored directions do not reproduce the iterates at step {step} (residual {residual:.3e})")]
    InconsistentRecord { step: usize, residual: f64 },

    #[error("trajectory parse error at line {line}: {message}")]
    TrajectoryParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
