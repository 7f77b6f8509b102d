//! Exact and heuristic solvers for sparse approximation: find the sparsest
//! `x` with `‖y − Hx‖ₚ ≤ α` for `p ∈ {1, ∞}`.
//!
//! - [`covering`]: set-covering IP with lazily generated forbidden-support cuts.
//! - [`bnc`]: big-M mixed-integer formulation solved by branch and cut.
//! - [`heuristic`]: variable neighborhood search with local-branching balls.
//! - [`brute`]: enumeration oracle for small dictionaries.
//!
//! All of them rely on the dense simplex in [`lp`] to decide whether a
//! support can reach the residual threshold.

pub mod bench;
pub mod bnc;
pub mod brute;
pub mod covering;
pub mod cuts;
pub mod error;
pub mod generate;
pub mod heuristic;
pub mod io;
pub mod lp;
pub mod model;
mod search;

pub use error::{Error, Result};
pub use model::{Instance, Norm, Solution, SolveStats, Support, Tolerances, TraceRecord};
pub use search::INT_TOL;
