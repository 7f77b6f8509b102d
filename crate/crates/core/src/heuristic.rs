//! Variable neighborhood search over supports with local-branching balls.
//!
//! Starting from a greedy support `b̂`, the search asks for a strictly
//! smaller feasible support within Hamming distance `δ` of `b̂`. Each
//! neighborhood is solved by the cover IP with the ball as a side row and
//! lazy forbidden-support certification. Radii grow by one on failure and
//! reset to `δ₀` on every improvement.

use std::time::{Duration, Instant};

use crate::covering::{recover_x, CoverIpStatus, CoveringIp, SideRow};
use crate::cuts::{extend_to_maximal, forbidden_support_cut, CutPool};
use crate::error::{Error, Result};
use crate::lp::{Relation, SupportOracle};
use crate::model::{Instance, Solution, Support, Tolerances, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VnsConfig {
    pub delta0: usize,
    pub delta_max: usize,
    pub delta_step: usize,
    /// Cover-IP nodes per neighborhood solve; `None` solves to optimality.
    pub neighborhood_nodes: Option<u64>,
    /// Lazy iterations per neighborhood; `None` for no cap.
    pub neighborhood_iterations: Option<u64>,
    pub time_limit: Option<Duration>,
    pub tol: Tolerances,
}

impl VnsConfig {
    /// Defaults for a dictionary with `m` columns: `δ₀ = 2`,
    /// `δ_max = min(m, 10)`, truncated neighborhoods.
    pub fn for_size(m: usize) -> Self {
        let delta_max = m.min(10);
        VnsConfig {
            delta0: 2.min(delta_max).max(1),
            delta_max,
            delta_step: 1,
            neighborhood_nodes: Some(10_000),
            neighborhood_iterations: Some(200),
            time_limit: None,
            tol: Tolerances::default(),
        }
    }

    /// Whole-space search: `δ_max = m` and no neighborhood budget.
    pub fn exhaustive(m: usize) -> Self {
        VnsConfig {
            delta_max: m,
            neighborhood_nodes: None,
            neighborhood_iterations: None,
            ..VnsConfig::for_size(m)
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(1 <= self.delta0 && self.delta0 <= self.delta_max && self.delta_max <= m) {
            return Err(Error::Config(format!(
                "need 1 ≤ delta0 ≤ delta_max ≤ m, got delta0 = {}, delta_max = {}, m = {m}",
                self.delta0, self.delta_max
            )));
        }
        if self.delta_step == 0 {
            return Err(Error::Config("delta_step must be positive".into()));
        }
        self.tol.validate()
    }
}

/// `Σ_{b̂_j=0} b_j + Σ_{b̂_j=1} (1 − b_j) ≤ δ`, with the constant moved to
/// the right-hand side.
pub fn local_branching_cut(b_hat: &[bool], delta: usize) -> SideRow {
    let ones = b_hat.iter().filter(|&&on| on).count();
    SideRow {
        coeffs: b_hat.iter().map(|&on| if on { -1.0 } else { 1.0 }).collect(),
        relation: Relation::Le,
        rhs: delta as f64 - ones as f64,
    }
}

/// Greedy forward selection by residual, then one backward pruning pass.
pub fn initial_solution(oracle: &SupportOracle<'_>) -> Result<Support> {
    let m = oracle.instance().m();
    if oracle.is_forbidden(&Support::full(m))? {
        return Err(Error::ProblemInfeasible);
    }
    let mut support = Support::empty();
    while oracle.is_forbidden(&support)? {
        let mut best: Option<(f64, usize)> = None;
        for k in support.complement(m) {
            let r = oracle.residual(&support.with(k))?;
            if best.is_none_or(|(br, _)| r < br) {
                best = Some((r, k));
            }
        }
        let (_, k) = best.ok_or(Error::ProblemInfeasible)?;
        support = support.with(k);
    }
    for &j in support.clone().indices() {
        let smaller = support.without(j);
        if !oracle.is_forbidden(&smaller)? {
            support = smaller;
        }
    }
    Ok(support)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NeighborhoodBudget {
    pub nodes: Option<u64>,
    pub iterations: Option<u64>,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodResult {
    /// Strictly smaller feasible support inside the ball, if one was found.
    pub improved: Option<Support>,
    /// False when the budget ran out before the ball was settled.
    pub proven: bool,
    pub nodes: u64,
}

/// Searches the `δ`-ball around a feasible `b̂` for a strictly smaller
/// feasible support. New lazy cuts go into the shared pool.
pub fn explore_neighborhood(
    oracle: &SupportOracle<'_>,
    pool: &mut CutPool,
    b_hat: &Support,
    delta: usize,
    budget: &NeighborhoodBudget,
) -> Result<NeighborhoodResult> {
    let m = oracle.instance().m();
    let mut nodes = 0;
    if b_hat.is_empty() {
        return Ok(NeighborhoodResult { improved: None, proven: true, nodes });
    }
    let ball = local_branching_cut(&b_hat.indicator(m), delta);
    let smaller = SideRow {
        coeffs: vec![1.0; m],
        relation: Relation::Le,
        rhs: (b_hat.len() - 1) as f64,
    };
    let mut iteration = 0;
    loop {
        if budget.iterations.is_some_and(|cap| iteration >= cap) {
            return Ok(NeighborhoodResult { improved: None, proven: false, nodes });
        }
        iteration += 1;
        let res = CoveringIp::new(m)
            .side_row(ball.clone())
            .side_row(smaller.clone())
            .max_nodes(budget.nodes.unwrap_or(u64::MAX))
            .deadline(budget.deadline)
            .solve(pool)?;
        nodes += res.nodes;
        let candidate = match res.status {
            CoverIpStatus::Optimal(s) => s,
            CoverIpStatus::Infeasible => return Ok(NeighborhoodResult { improved: None, proven: true, nodes }),
            CoverIpStatus::LimitReached(_) => {
                return Ok(NeighborhoodResult { improved: None, proven: false, nodes });
            }
        };
        if !oracle.is_forbidden(&candidate)? {
            return Ok(NeighborhoodResult {
                improved: Some(candidate),
                proven: true,
                nodes,
            });
        }
        let extended = extend_to_maximal(oracle, &candidate)?;
        pool.insert(forbidden_support_cut(&extended, m));
        pool.record_forbidden(extended);
        if let Some(fam) = pool.latest_family_cut(m) {
            pool.insert(fam);
        }
    }
}

pub fn vns_solve(inst: &Instance, cfg: &VnsConfig) -> Result<Solution> {
    cfg.validate(inst.m())?;
    let deadline = cfg.time_limit.map(|t| Instant::now() + t);
    let oracle = SupportOracle::new(inst, cfg.tol);
    let mut pool = CutPool::new();
    let mut current = initial_solution(&oracle)?;
    let initial = current.len();
    let budget = NeighborhoodBudget {
        nodes: cfg.neighborhood_nodes,
        iterations: cfg.neighborhood_iterations,
        deadline,
    };

    let mut trace = Vec::new();
    let mut nodes = 0;
    let mut iterations = 0;
    let mut whole_space_settled = false;
    let mut delta = cfg.delta0;
    while delta <= cfg.delta_max && !current.is_empty() {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        iterations += 1;
        let res = explore_neighborhood(&oracle, &mut pool, &current, delta, &budget)?;
        nodes += res.nodes;
        trace.push(TraceRecord::Neighborhood {
            delta,
            improved: res.improved.is_some(),
            incumbent_size: res.improved.as_ref().unwrap_or(&current).len(),
            proven: res.proven,
        });
        match res.improved {
            Some(better) => {
                current = better;
                delta = cfg.delta0;
            }
            None => {
                if delta >= inst.m() && res.proven {
                    whole_space_settled = true;
                }
                delta += cfg.delta_step;
            }
        }
    }

    let mut sol = recover_x(inst, &current, &cfg.tol)?;
    let stats = &mut sol.stats;
    stats.initial_objective = Some(initial);
    stats.proven_optimal = current.is_empty() || whole_space_settled;
    stats.lower_bound = if stats.proven_optimal { sol.objective } else { 0 };
    stats.nodes = nodes;
    stats.iterations = iterations;
    stats.lp_calls += oracle.lp_calls();
    stats.cuts = pool.cuts().to_vec();
    stats.maximal_supports = pool.forbidden_history().to_vec();
    stats.trace = trace;
    Ok(sol)
}
