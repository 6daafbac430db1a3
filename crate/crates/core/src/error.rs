//! Crate-wide error type. Contract violations are reported as data, not
//! panics, so callers (CLI, bindings, harness) can degrade gracefully.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A budget is too small for the requested accuracy: the step size
    /// `delta_j = 8 ln(n m beta / eps) / (eps B_j)` must stay at or below 1/2.
    #[error("budget too small for resource {resource}: delta = {delta:.6} exceeds 1/2")]
    BudgetTooSmall { resource: usize, delta: f64 },

    /// A sample is too small to support the requested order statistic.
    #[error("sample too small: need at least {needed} requests, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    /// Exhaustive search would visit more than the enforced guard allows.
    #[error("search space too large: {size:.3e} decision tuples exceed the {guard:.1e} guard")]
    SearchSpaceTooLarge { size: f64, guard: f64 },

    /// The LP solver exceeded its iteration cap or lost feasibility.
    #[error("numerical failure in LP solve: {0}")]
    NumericalFailure(String),

    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An instance or scenario failed validation.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
