//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset validation, metrics, mitigation methods, and IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("length mismatch: {left} is {left_len}, {right} is {right_len}")]
    LengthMismatch {
        left: &'static str,
        left_len: usize,
        right: &'static str,
        right_len: usize,
    },

    #[error("metric '{metric}' is undefined: {reason}")]
    UndefinedMetric { metric: &'static str, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("infeasible relabel: need {needed} candidates in {cell} but only {available} available")]
    InfeasibleRelabel {
        cell: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("infeasible sample: cell {cell} must shrink by {removals} but holds {available} rows")]
    InfeasibleSample {
        cell: &'static str,
        removals: usize,
        available: usize,
    },

    #[error("undefined weights: empty cell {0}")]
    UndefinedWeight(&'static str),

    #[error("degenerate residualizer: {0}")]
    DegenerateResidualizer(String),

    #[error("shape mismatch: expected {expected} columns, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
