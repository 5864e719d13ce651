//! Error types shared across the solver.

use thiserror::Error;

/// Errors produced by the math-program kernel.
#[derive(Debug, Clone, Error)]
pub enum MpError {
    /// The program description is inconsistent (dimensions, bad indices,
    /// non-finite coefficients).
    #[error("ill-formed math program: {0}")]
    BadProgram(String),
    /// The simplex loop hit its pivot cap; numerical trouble, callers must
    /// fail loudly rather than use a partial answer.
    #[error("LP iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    /// Branch-and-bound hit its node cap.
    #[error("MIP node limit reached after {0} nodes")]
    NodeLimit(usize),
    /// A solve that must produce an optimum came back with another status.
    #[error("expected optimal solution, got {0}")]
    NotOptimal(String),
}

/// Top-level error type for the solver library.
#[derive(Debug, Error)]
pub enum PosgError {
    #[error("model validation failed: {0}")]
    InvalidModel(String),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A value function (or one of its per-state slices) is empty where the
    /// algorithm requires at least one vector.
    #[error("empty value-function structure: {0}")]
    EmptyStructure(String),

    #[error("math program failure: {0}")]
    MathProgram(#[from] MpError),

    /// The brute-force oracle refused an instance that exceeds its
    /// branching budget.
    #[error("tractability guard: {0}")]
    Tractability(String),

    #[error("stage out of range: {0}")]
    StageOutOfRange(String),

    #[error("horizon must satisfy {0}")]
    BadHorizon(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("model file rejected: {0}")]
    ModelFile(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, PosgError>;

impl PosgError {
    /// Process exit code used by the CLI: 2 validation, 3 numerical
    /// failure, 4 tractability guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            PosgError::InvalidModel(_)
            | PosgError::InvalidBelief(_)
            | PosgError::IndexOutOfRange(_)
            | PosgError::ModelFile(_)
            | PosgError::BadHorizon(_)
            | PosgError::StageOutOfRange(_)
            | PosgError::Json(_) => 2,
            PosgError::MathProgram(_) => 3,
            PosgError::Tractability(_) => 4,
            _ => 3,
        }
    }
}
