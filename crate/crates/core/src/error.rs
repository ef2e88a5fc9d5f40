use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    PreconditionFailure(String),

    #[error("t = {t} lies outside the domain [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("inverted interval [{lo}, {hi}]")]
    InvertedInterval { lo: f64, hi: f64 },

    #[error("no solution for {requested}; achievable range is ({lo}, {hi}]")]
    NoSolution { requested: f64, lo: f64, hi: f64 },

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("element budget of {budget} exceeded after {depth} complete levels")]
    BudgetExceeded { budget: usize, depth: usize },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("invalid point reference: {0}")]
    InvalidRef(String),

    #[error("no convergence after {iterations} iterations (certificate {certificate:e})")]
    NonConvergence { iterations: usize, certificate: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidParameter(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> LabError {
    LabError::PreconditionFailure(msg.into())
}
