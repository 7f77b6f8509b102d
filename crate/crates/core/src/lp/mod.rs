//! Linear programming: a dense simplex engine and the fixed-support
//! residual oracle built on it.

mod residual;
mod simplex;

pub use residual::{is_forbidden, min_residual, residual_lp, ResidualFit, SupportOracle};
pub use simplex::{
    simplex_solve, simplex_solve_with, LpError, LpOutcome, LpProblem, LpStatus, Relation, Row, SimplexOptions,
};
