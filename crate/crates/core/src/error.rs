use thiserror::Error;

use crate::metrics::LinearFit;

#[derive(Debug, Error)]
pub enum Error {
    #[error("universe width mismatch: expected {expected} items, got {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("{what} supports at most {limit} items, got {n}")]
    Capacity {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("closest-linear search did not converge after {iterations} rounds (best delta {})", best.delta)]
    NonConvergence {
        iterations: usize,
        best: Box<LinearFit>,
    },

    #[error("no linear function within band {band} of the queried values (best achievable {min_delta})")]
    Infeasible { band: f64, min_delta: f64 },

    #[error("LP solver hit its pivot limit ({0} pivots)")]
    PivotLimit(usize),

    #[error("certificate precondition failed on set {set}: value {value}, expected {expected}")]
    Certificate {
        set: String,
        value: f64,
        expected: f64,
    },

    #[error("unsupported function: {0}")]
    Unsupported(String),

    #[error("expansion violated: no perfect matching for item {item} ({sources} sources)")]
    ExpansionViolation { item: usize, sources: usize },

    #[error("malformed set-function file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
