use thiserror::Error;

use crate::lp::LpError;
use crate::model::Solution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Lp(#[from] LpError),

    /// Even the full support cannot bring the residual under the threshold.
    #[error("problem is infeasible: the full support exceeds the residual threshold")]
    ProblemInfeasible,

    /// A node, iteration or time limit stopped the search. The bound is a
    /// valid lower bound on the optimal support size.
    #[error("{what} limit reached (lower bound {bound}, incumbent {})", incumbent_size(.incumbent))]
    LimitReached {
        what: &'static str,
        bound: usize,
        incumbent: Option<Box<Solution>>,
    },

    #[error("big-M value {big_m} was still binding after re-solving")]
    BigMSuspect { big_m: f64 },

    #[error("enumeration over {m} columns exceeds the limit of {limit}")]
    TooManyColumns { m: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Exact methods reported different optimal objectives.
    #[error("exact methods disagree: {0}")]
    Disagreement(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

fn incumbent_size(incumbent: &Option<Box<Solution>>) -> String {
    match incumbent {
        Some(sol) => sol.objective.to_string(),
        None => "none".to_string(),
    }
}
