//! Direct big-M formulation solved by branch and cut.
//!
//! Variables are laid out as `[b_1..b_m | x_1..x_m | w]`, with one `w_i`
//! per observation for ℓ1 and a single `w` for ℓ∞. Rows come in a fixed
//! order:
//!
//! 1. coupling, two per column: `x_j − M·b_j ≤ 0` then `−x_j − M·b_j ≤ 0`;
//! 2. residual, two per observation: `h_i·x + w ≥ y_i` then `h_i·x − w ≤ y_i`;
//! 3. one budget row: `Σ w_i ≤ α` (ℓ1) or `w ≤ α` (ℓ∞);
//! 4. the current cut pool, each cut as a `≥` row over `b`.
//!
//! `M` has no principled value, so every accepted incumbent is checked
//! against it. If an incumbent needs `|x_j|` within 1% of `M`, or the root
//! is infeasible although the full support is not, `M` is doubled and the
//! model re-solved.

use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::search::{ceil_bound, is_integral, most_fractional, Node, INT_TOL};
use crate::cuts::{extend_to_maximal, forbidden_support_cut, separate, CutPool};
use crate::error::{Error, Result};
use crate::lp::{min_residual, simplex_solve, LpOutcome, LpProblem, LpStatus, Relation, SupportOracle};
use crate::model::{support_of, IncumbentRecord, Instance, Norm, Solution, Support, Tolerances, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MipDims {
    pub binaries: usize,
    pub xs: usize,
    pub ws: usize,
    pub coupling_rows: usize,
    pub residual_rows: usize,
    pub budget_rows: usize,
}

#[derive(Debug, Clone)]
pub struct MipModel<'a> {
    inst: &'a Instance,
    big_m: f64,
    budget: f64,
}

pub fn build_mip(inst: &Instance, big_m: f64) -> Result<MipModel<'_>> {
    build_mip_with(inst, big_m, &Tolerances::default())
}

/// The budget row uses `α + feas_tol` so that the model accepts exactly the
/// supports the residual oracle accepts.
pub fn build_mip_with<'a>(inst: &'a Instance, big_m: f64, tol: &Tolerances) -> Result<MipModel<'a>> {
    if !(big_m.is_finite() && big_m > 0.0) {
        return Err(Error::Config(format!("big-M must be finite and positive, got {big_m}")));
    }
    Ok(MipModel {
        inst,
        big_m,
        budget: inst.alpha() + tol.feas_tol,
    })
}

impl<'a> MipModel<'a> {
    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn dims(&self) -> MipDims {
        let (n, m) = (self.inst.n(), self.inst.m());
        MipDims {
            binaries: m,
            xs: m,
            ws: self.n_w(),
            coupling_rows: 2 * m,
            residual_rows: 2 * n,
            budget_rows: 1,
        }
    }

    fn n_w(&self) -> usize {
        match self.inst.norm() {
            Norm::L1 => self.inst.n(),
            Norm::LInf => 1,
        }
    }

    pub fn num_vars(&self) -> usize {
        2 * self.inst.m() + self.n_w()
    }

    /// Continuous relaxation with `b_j ∈ [lo_j, hi_j]` and the pool's cuts.
    pub fn relaxation(&self, lo: &[f64], hi: &[f64], pool: &CutPool) -> LpProblem {
        let (n, m) = (self.inst.n(), self.inst.m());
        let nv = self.num_vars();
        let mut obj = vec![0.0; nv];
        for c in &mut obj[..m] {
            *c = 1.0;
        }
        let mut lp = LpProblem::new(obj);
        for j in 0..m {
            lp.set_bounds(j, lo[j], hi[j]);
            lp.set_free(m + j);
        }
        for j in 0..m {
            lp.add_sparse_row(&[(m + j, 1.0), (j, -self.big_m)], Relation::Le, 0.0);
            lp.add_sparse_row(&[(m + j, -1.0), (j, -self.big_m)], Relation::Le, 0.0);
        }
        for i in 0..n {
            let w = 2 * m + if self.n_w() == 1 { 0 } else { i };
            let mut row = vec![0.0; nv];
            row[m..2 * m].copy_from_slice(self.inst.row(i));
            let mut upper = row.clone();
            row[w] = 1.0;
            upper[w] = -1.0;
            lp.add_row(row, Relation::Ge, self.inst.y()[i]);
            lp.add_row(upper, Relation::Le, self.inst.y()[i]);
        }
        let ws: Vec<(usize, f64)> = (2 * m..nv).map(|k| (k, 1.0)).collect();
        lp.add_sparse_row(&ws, Relation::Le, self.budget);
        for cut in pool.cuts() {
            let mut row = vec![0.0; nv];
            row[..m].copy_from_slice(&cut.coefficients(m));
            lp.add_row(row, Relation::Ge, f64::from(cut.rhs()));
        }
        lp
    }
}

/// Solves the node relaxation. `fixings[j]` bounds `b_j` within `[0, 1]`.
pub fn solve_relaxation(model: &MipModel<'_>, fixings: &[(f64, f64)], pool: &CutPool) -> Result<LpOutcome> {
    let m = model.inst.m();
    if fixings.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: fixings.len() });
    }
    if fixings.iter().any(|&(l, u)| !(0.0..=1.0).contains(&l) || !(0.0..=1.0).contains(&u) || l > u) {
        return Err(Error::Config("b fixings must be intervals within [0, 1]".into()));
    }
    let lo: Vec<f64> = fixings.iter().map(|f| f.0).collect();
    let hi: Vec<f64> = fixings.iter().map(|f| f.1).collect();
    Ok(simplex_solve(&model.relaxation(&lo, &hi, pool))?)
}

/// `safety × max(max_j |x*_j|, ‖y‖∞)` for the full-support residual
/// optimum `x*`; 1 when that is zero.
pub fn choose_big_m(inst: &Instance, safety: f64, tol: &Tolerances) -> Result<f64> {
    let fit = min_residual(inst, &Support::full(inst.m()))?;
    if fit.residual > inst.alpha() + tol.feas_tol {
        return Err(Error::ProblemInfeasible);
    }
    let x_max = fit.coefficients.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let y_max = inst.y().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let big_m = safety * x_max.max(y_max);
    Ok(if big_m > 0.0 { big_m } else { 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BncConfig {
    /// Multiplier applied by [`choose_big_m`].
    pub safety: f64,
    /// Fixed starting `M`, bypassing [`choose_big_m`].
    pub big_m: Option<f64>,
    /// Relative margin an incumbent must keep below `M`.
    pub m_guard: f64,
    pub max_doublings: usize,
    /// Separate forbidden-support cuts at fractional nodes.
    pub separation: bool,
    pub cut_rounds: usize,
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
    /// Record one trace line per node.
    pub trace_nodes: bool,
    pub tol: Tolerances,
}

impl Default for BncConfig {
    fn default() -> Self {
        BncConfig {
            safety: 100.0,
            big_m: None,
            m_guard: 0.01,
            max_doublings: 2,
            separation: true,
            cut_rounds: 3,
            max_nodes: 1_000_000,
            time_limit: None,
            trace_nodes: false,
            tol: Tolerances::default(),
        }
    }
}

pub fn solve_branch_and_cut(inst: &Instance, cfg: &BncConfig) -> Result<Solution> {
    cfg.tol.validate()?;
    let deadline = cfg.time_limit.map(|t| Instant::now() + t);
    let oracle = SupportOracle::new(inst, cfg.tol);
    let mut big_m = match cfg.big_m {
        Some(v) => v,
        None => choose_big_m(inst, cfg.safety, &cfg.tol)?,
    };
    let mut pool = CutPool::new();
    let mut search = Search {
        oracle: &oracle,
        cfg,
        deadline,
        nodes: 0,
        incumbents: Vec::new(),
        trace: Vec::new(),
        warnings: Vec::new(),
    };

    for attempt in 0..=cfg.max_doublings {
        let model = build_mip_with(inst, big_m, &cfg.tol)?;
        match search.run(&model, &mut pool)? {
            RunEnd::Binding => {
                search.warnings.push(format!(
                    "big-M {big_m} was binding (attempt {}); doubling",
                    attempt + 1
                ));
                big_m *= 2.0;
            }
            RunEnd::Done { x, bound, complete } => {
                let mut sol = Solution::from_x(inst, x, &cfg.tol)?;
                let stats = &mut sol.stats;
                stats.lower_bound = bound;
                stats.proven_optimal = complete;
                stats.nodes = search.nodes;
                stats.lp_calls = oracle.lp_calls();
                stats.cuts = pool.cuts().to_vec();
                stats.maximal_supports = pool.forbidden_history().to_vec();
                stats.incumbents = search.incumbents.into_iter().filter(|r| r.big_m == big_m).collect();
                stats.big_m = Some(big_m);
                stats.warnings = search.warnings;
                stats.trace = search.trace;
                if complete {
                    return Ok(sol);
                }
                return Err(Error::LimitReached {
                    what: "node",
                    bound,
                    incumbent: Some(Box::new(sol)),
                });
            }
            RunEnd::NoIncumbent { bound } => {
                return Err(Error::LimitReached {
                    what: "node",
                    bound,
                    incumbent: None,
                })
            }
            RunEnd::RootInfeasible => return Err(Error::ProblemInfeasible),
        }
    }
    Err(Error::BigMSuspect { big_m: big_m / 2.0 })
}

enum RunEnd {
    Done { x: Vec<f64>, bound: usize, complete: bool },
    NoIncumbent { bound: usize },
    Binding,
    RootInfeasible,
}

struct Search<'o, 'i, 'c> {
    oracle: &'o SupportOracle<'i>,
    cfg: &'c BncConfig,
    deadline: Option<Instant>,
    nodes: u64,
    incumbents: Vec<IncumbentRecord>,
    trace: Vec<TraceRecord>,
    warnings: Vec<String>,
}

impl Search<'_, '_, '_> {
    fn run(&mut self, model: &MipModel<'_>, pool: &mut CutPool) -> Result<RunEnd> {
        let m = model.inst.m();
        let big_m = model.big_m;
        let cap = (1.0 - self.cfg.m_guard) * big_m;
        let mut heap = BinaryHeap::new();
        heap.push(Node::root(m));
        let mut next_id = 1;
        let mut best: Option<(Vec<f64>, usize)> = None;
        let prunes = |bound: f64, best: &Option<(Vec<f64>, usize)>| {
            best.as_ref().is_some_and(|(_, obj)| bound > *obj as f64 - 1.0 + INT_TOL)
        };
        let mut root = true;

        while let Some(node) = heap.pop() {
            if prunes(node.bound, &best) {
                continue;
            }
            let out_of_time = self.deadline.is_some_and(|d| Instant::now() >= d);
            if self.nodes >= self.cfg.max_nodes || out_of_time {
                let open = std::iter::once(node.bound).chain(heap.iter().map(|n| n.bound));
                let mut bound = open.map(ceil_bound).min().unwrap_or(0);
                return Ok(match best {
                    Some((x, obj)) => {
                        bound = bound.min(obj);
                        RunEnd::Done { x, bound, complete: false }
                    }
                    None => RunEnd::NoIncumbent { bound },
                });
            }
            self.nodes += 1;

            let mut added = 0;
            let mut rounds = 0;
            let out = loop {
                let out = simplex_solve(&model.relaxation(&node.lo, &node.hi, pool))?;
                if out.status != LpStatus::Optimal
                    || prunes(out.objective, &best)
                    || is_integral(&out.x[..m])
                    || !self.cfg.separation
                    || rounds >= self.cfg.cut_rounds
                {
                    break out;
                }
                rounds += 1;
                let before = pool.len();
                separate(&out.x[..m], self.oracle, pool)?;
                if pool.len() == before {
                    break out;
                }
                added += pool.len() - before;
            };
            match out.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible if root => return self.root_infeasible(m),
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => return Err(Error::Contract("big-M relaxation cannot be unbounded".into())),
            }
            root = false;
            let b = &out.x[..m];
            if self.cfg.trace_nodes {
                self.trace.push(TraceRecord::Node {
                    node: self.nodes,
                    depth: node.depth,
                    bound: out.objective,
                    fractional: b.iter().filter(|v| (*v - v.round()).abs() > INT_TOL).count(),
                    cuts_added: added,
                });
            }
            if prunes(out.objective, &best) {
                continue;
            }

            if is_integral(b) {
                // Near-zero indicators still let x_j reach M·INT_TOL, so the
                // node point is only trusted for its rounded support. The
                // coefficients come from the big-M-free fit on that support.
                let support = Support::from_indicator(&b.iter().map(|&v| v > 0.5).collect::<Vec<_>>());
                let fit = self.oracle.fit(&support)?;
                if fit.residual > model.inst.alpha() + self.cfg.tol.feas_tol {
                    let extended = extend_to_maximal(self.oracle, &support)?;
                    pool.insert(forbidden_support_cut(&extended, m));
                    pool.record_forbidden(extended);
                    heap.push(Node {
                        lo: node.lo.clone(),
                        hi: node.hi.clone(),
                        bound: out.objective,
                        depth: node.depth,
                        id: next_id,
                    });
                    next_id += 1;
                    continue;
                }
                let x = fit.embed(&support, m);
                let obj = support_of(&x, &self.cfg.tol).len();
                let record = IncumbentRecord {
                    objective: obj,
                    max_abs_x: max_abs(&x),
                    big_m,
                };
                if record.max_abs_x > cap {
                    return Ok(RunEnd::Binding);
                }
                if best.as_ref().is_none_or(|(_, b)| obj < *b) {
                    self.incumbents.push(record);
                    best = Some((x, obj));
                }
                continue;
            }

            let j = most_fractional(b);
            for value in [1.0, 0.0] {
                heap.push(node.child(j, value, out.objective, next_id));
                next_id += 1;
            }
        }

        Ok(match best {
            Some((x, obj)) => RunEnd::Done { x, bound: obj, complete: true },
            None if root => return self.root_infeasible(m),
            // Every leaf was LP-infeasible even though the root was not;
            // cannot happen for a consistent model.
            None => return Err(Error::Contract("branch and cut ended without an incumbent".into())),
        })
    }
}

impl Search<'_, '_, '_> {
    /// An infeasible root is the problem's fault only if the full support
    /// misses the threshold too; otherwise `M` is too small to reach it.
    fn root_infeasible(&self, m: usize) -> Result<RunEnd> {
        Ok(if self.oracle.is_forbidden(&Support::full(m))? {
            RunEnd::RootInfeasible
        } else {
            RunEnd::Binding
        })
    }
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{diag34, three_column};

    #[test]
    fn layout_counts() {
        let inst = three_column(Norm::L1, 0.25);
        let d = build_mip(&inst, 10.0).unwrap().dims();
        assert_eq!(
            d,
            MipDims { binaries: 3, xs: 3, ws: 2, coupling_rows: 6, residual_rows: 4, budget_rows: 1 }
        );
        let inst = three_column(Norm::LInf, 0.25);
        let model = build_mip(&inst, 10.0).unwrap();
        assert_eq!(model.dims().ws, 1);
        assert_eq!(model.relaxation(&[0.0; 3], &[1.0; 3], &CutPool::new()).num_rows(), 11);
        assert!(build_mip(&inst, 0.0).is_err());
    }

    #[test]
    fn relaxation_examples() {
        let inst = three_column(Norm::LInf, 0.25);
        let model = build_mip(&inst, 10.0).unwrap();
        let pool = CutPool::new();

        let all_one = solve_relaxation(&model, &[(1.0, 1.0); 3], &pool).unwrap();
        assert!((all_one.objective - 3.0).abs() <= 1e-9);

        let all_zero = solve_relaxation(&model, &[(0.0, 0.0); 3], &pool).unwrap();
        assert_eq!(all_zero.status, LpStatus::Infeasible);

        // With budget β = α + feas_tol: Σ|x_j| ≥ ((x1 + x3) + (x2 + x3)) / 2
        // ≥ 1 − β, attained at x3 = 1 − β, so the bound is (1 − β) / M ≈ 0.075.
        let free = solve_relaxation(&model, &[(0.0, 1.0); 3], &pool).unwrap();
        let beta = 0.25 + Tolerances::default().feas_tol;
        assert!((free.objective - (1.0 - beta) / 10.0).abs() <= 1e-9);
    }

    #[test]
    fn big_m_examples() {
        let tol = Tolerances::default();
        assert_eq!(choose_big_m(&diag34(Norm::L1, 1.0), 100.0, &tol).unwrap(), 400.0);
        let zero = Instance::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], Norm::L1, 0.0).unwrap();
        assert_eq!(choose_big_m(&zero, 100.0, &tol).unwrap(), 1.0);
        assert_eq!(choose_big_m(&three_column(Norm::LInf, 0.25), 100.0, &tol).unwrap(), 100.0);
    }

    #[test]
    fn branch_and_cut_examples() {
        let cfg = BncConfig::default();
        let sol = solve_branch_and_cut(&three_column(Norm::LInf, 0.25), &cfg).unwrap();
        assert_eq!(sol.objective, 1);
        assert_eq!(sol.support.one_based(), vec![3]);

        let sol = solve_branch_and_cut(&three_column(Norm::L1, 2.0), &cfg).unwrap();
        assert_eq!(sol.objective, 0);

        let sol = solve_branch_and_cut(&diag34(Norm::L1, 1.0), &cfg).unwrap();
        assert_eq!(sol.objective, 2);
    }

    #[test]
    fn without_separation() {
        let cfg = BncConfig { separation: false, trace_nodes: true, ..Default::default() };
        let sol = solve_branch_and_cut(&three_column(Norm::LInf, 0.25), &cfg).unwrap();
        assert_eq!(sol.objective, 1);
        assert!(sol.stats.cuts.is_empty());
        assert!(!sol.stats.trace.is_empty());
    }

    #[test]
    fn undersized_big_m_is_doubled() {
        // Optimum {3} needs x3 = 4; starting from M = 2 takes two doublings.
        let inst = Instance::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]], vec![4.0, 4.0], Norm::LInf, 0.0)
            .unwrap();
        let cfg = BncConfig { big_m: Some(2.0), ..Default::default() };
        let sol = solve_branch_and_cut(&inst, &cfg).unwrap();
        assert_eq!(sol.objective, 1);
        assert_eq!(sol.stats.big_m, Some(8.0));
        assert_eq!(sol.stats.warnings.len(), 2);

        let cfg = BncConfig { big_m: Some(2.0), max_doublings: 1, ..Default::default() };
        assert!(matches!(solve_branch_and_cut(&inst, &cfg), Err(Error::BigMSuspect { .. })));
    }

    #[test]
    fn infeasible_problem() {
        let inst = Instance::from_rows(&[vec![1.0], vec![0.0]], vec![1.0, 1.0], Norm::LInf, 0.0).unwrap();
        assert!(matches!(
            solve_branch_and_cut(&inst, &BncConfig::default()),
            Err(Error::ProblemInfeasible)
        ));
        let cfg = BncConfig { big_m: Some(5.0), ..Default::default() };
        assert!(matches!(solve_branch_and_cut(&inst, &cfg), Err(Error::ProblemInfeasible)));
    }
}
