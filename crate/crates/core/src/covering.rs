//! Set-covering reformulation solved with lazily generated forbidden-support
//! cuts.
//!
//! The feasible supports are exactly the binary points satisfying every
//! forbidden-support inequality, so the sparsest solution is a minimum
//! cover. The cover IP starts from a near-empty pool; each integer optimum
//! is certified by the residual LP and, if forbidden, maximally extended
//! into a new cut. The first certified optimum is optimal overall, and the
//! coefficients are recovered afterwards on the fixed support without any
//! big-M bound.

use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::cuts::{extend_to_maximal, forbidden_support_cut, separate, CoverInequality, CutPool};
use crate::error::{Error, Result};
use crate::lp::{simplex_solve, LpProblem, LpStatus, Relation, SupportOracle};
use crate::model::{Instance, Solution, Support, Tolerances, TraceRecord};
use crate::search::{ceil_bound, is_integral, most_fractional, Node, INT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringLimits {
    /// Branch-and-bound nodes per cover IP solve.
    pub max_nodes: u64,
    /// Lazy-constraint iterations.
    pub max_iterations: u64,
    pub time_limit: Option<Duration>,
}

impl Default for CoveringLimits {
    fn default() -> Self {
        CoveringLimits {
            max_nodes: 1_000_000,
            max_iterations: 10_000,
            time_limit: None,
        }
    }
}

/// Extra linear row over the indicators `b`, e.g. a local-branching ball.
#[derive(Debug, Clone, PartialEq)]
pub struct SideRow {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl SideRow {
    pub fn is_satisfied_by(&self, b: &[f64]) -> bool {
        let lhs: f64 = self.coeffs.iter().zip(b).map(|(c, v)| c * v).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs + INT_TOL,
            Relation::Ge => lhs >= self.rhs - INT_TOL,
            Relation::Eq => (lhs - self.rhs).abs() <= INT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverIpStatus {
    Optimal(Support),
    /// No binary point satisfies the pool and side rows.
    Infeasible,
    /// Node or time limit; carries the best support found, if any.
    LimitReached(Option<Support>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverIpResult {
    pub status: CoverIpStatus,
    /// Valid lower bound on the cover size.
    pub bound: usize,
    pub nodes: u64,
}

/// Minimum-cardinality cover of a cut pool by best-first branch and bound.
#[derive(Debug)]
pub struct CoveringIp<'o, 'i> {
    m: usize,
    side: Vec<SideRow>,
    max_nodes: u64,
    deadline: Option<Instant>,
    separation: Option<&'o SupportOracle<'i>>,
}

impl<'o, 'i> CoveringIp<'o, 'i> {
    pub fn new(m: usize) -> Self {
        CoveringIp {
            m,
            side: Vec::new(),
            max_nodes: CoveringLimits::default().max_nodes,
            deadline: None,
            separation: None,
        }
    }

    pub fn side_row(mut self, row: SideRow) -> Self {
        assert_eq!(row.coeffs.len(), self.m);
        self.side.push(row);
        self
    }

    pub fn max_nodes(mut self, max_nodes: u64) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    pub fn deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    /// Separate forbidden-support cuts at fractional nodes as well.
    pub fn with_separation(mut self, oracle: &'o SupportOracle<'i>) -> Self {
        self.separation = Some(oracle);
        self
    }

    fn relaxation(&self, pool: &CutPool, lo: &[f64], hi: &[f64]) -> LpProblem {
        let mut lp = LpProblem::new(vec![1.0; self.m]);
        for j in 0..self.m {
            lp.set_bounds(j, lo[j], hi[j]);
        }
        for cut in pool.cuts() {
            lp.add_row(cut.coefficients(self.m), Relation::Ge, f64::from(cut.rhs()));
        }
        for row in &self.side {
            lp.add_row(row.coeffs.clone(), row.relation, row.rhs);
        }
        lp
    }

    fn admits(&self, pool: &CutPool, b: &[f64]) -> bool {
        let support = Support::from_indicator(&b.iter().map(|&v| v > 0.5).collect::<Vec<_>>());
        pool.is_satisfied_by(&support) && self.side.iter().all(|r| r.is_satisfied_by(b))
    }

    pub fn solve(&self, pool: &mut CutPool) -> Result<CoverIpResult> {
        let m = self.m;
        let mut heap = BinaryHeap::new();
        heap.push(Node::root(m));
        let mut next_id = 1u64;
        let mut incumbent: Option<Vec<f64>> = None;
        let mut inc_obj = usize::MAX;
        let mut nodes = 0u64;
        let prunes = |bound: f64, inc_obj: usize| inc_obj != usize::MAX && bound > inc_obj as f64 - 1.0 + INT_TOL;

        while let Some(node) = heap.pop() {
            if prunes(node.bound, inc_obj) {
                continue;
            }
            let out_of_time = self.deadline.is_some_and(|d| Instant::now() >= d);
            if nodes >= self.max_nodes || out_of_time {
                let open = std::iter::once(node.bound).chain(heap.iter().map(|n| n.bound));
                let bound = open.map(ceil_bound).min().unwrap_or(0).min(inc_obj);
                let best = incumbent.as_ref().map(|b| indicator_support(b));
                return Ok(CoverIpResult {
                    status: CoverIpStatus::LimitReached(best),
                    bound,
                    nodes,
                });
            }
            nodes += 1;

            let mut rounds = 0;
            let (objective, b) = loop {
                let lp = self.relaxation(pool, &node.lo, &node.hi);
                let out = simplex_solve(&lp)?;
                match out.status {
                    LpStatus::Optimal => {}
                    LpStatus::Infeasible => break (f64::INFINITY, Vec::new()),
                    LpStatus::Unbounded => {
                        return Err(Error::Contract("cover relaxation cannot be unbounded".into()));
                    }
                }
                if prunes(out.objective, inc_obj) || is_integral(&out.x) {
                    break (out.objective, out.x);
                }
                let Some(oracle) = self.separation else { break (out.objective, out.x) };
                if rounds >= 3 {
                    break (out.objective, out.x);
                }
                rounds += 1;
                let before = pool.len();
                separate(&out.x, oracle, pool)?;
                if pool.len() == before {
                    break (out.objective, out.x);
                }
            };
            if !objective.is_finite() || prunes(objective, inc_obj) {
                continue;
            }

            if is_integral(&b) {
                let rounded: Vec<f64> = b.iter().map(|v| v.round()).collect();
                let obj = rounded.iter().filter(|&&v| v > 0.5).count();
                if obj < inc_obj && self.admits(pool, &rounded) {
                    inc_obj = obj;
                    incumbent = Some(rounded);
                }
                continue;
            }

            let ceiled: Vec<f64> = b.iter().map(|&v| if v > INT_TOL { 1.0 } else { 0.0 }).collect();
            let obj = ceiled.iter().filter(|&&v| v > 0.5).count();
            if obj < inc_obj && self.admits(pool, &ceiled) {
                inc_obj = obj;
                incumbent = Some(ceiled);
                if prunes(objective, inc_obj) {
                    continue;
                }
            }

            let j = most_fractional(&b);
            for value in [1.0, 0.0] {
                heap.push(node.child(j, value, objective, next_id));
                next_id += 1;
            }
        }

        Ok(match incumbent {
            Some(b) => CoverIpResult {
                status: CoverIpStatus::Optimal(indicator_support(&b)),
                bound: inc_obj,
                nodes,
            },
            None => CoverIpResult {
                status: CoverIpStatus::Infeasible,
                bound: 0,
                nodes,
            },
        })
    }
}

/// Minimum cover of the pool's cuts over `m` columns.
pub fn solve_covering_ip(pool: &CutPool, m: usize, limits: &CoveringLimits) -> Result<Support> {
    let deadline = limits.time_limit.map(|t| Instant::now() + t);
    let mut pool = pool.clone();
    let res = CoveringIp::new(m).max_nodes(limits.max_nodes).deadline(deadline).solve(&mut pool)?;
    match res.status {
        CoverIpStatus::Optimal(s) => Ok(s),
        CoverIpStatus::Infeasible => Err(Error::ProblemInfeasible),
        CoverIpStatus::LimitReached(_) => Err(Error::LimitReached {
            what: "node",
            bound: res.bound,
            incumbent: None,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageConfig {
    pub limits: CoveringLimits,
    /// Add a family cut after each lazy cut when two overlapping maximal
    /// forbidden supports are available.
    pub family_cuts: bool,
    /// Separate at fractional cover-IP nodes too.
    pub fractional_separation: bool,
    pub tol: Tolerances,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        TwoStageConfig {
            limits: CoveringLimits::default(),
            family_cuts: true,
            fractional_separation: false,
            tol: Tolerances::default(),
        }
    }
}

/// Lazy cover IP loop followed by coefficient recovery.
pub fn solve_two_stage(inst: &Instance, cfg: &TwoStageConfig) -> Result<Solution> {
    cfg.tol.validate()?;
    let start = Instant::now();
    let deadline = cfg.limits.time_limit.map(|t| start + t);
    let oracle = SupportOracle::new(inst, cfg.tol);
    let m = inst.m();
    let mut pool = CutPool::new();
    let mut nodes = 0u64;
    let mut maximal = Vec::new();
    let mut trace = Vec::new();

    if !oracle.is_forbidden(&Support::empty())? {
        let mut sol = recover_x(inst, &Support::empty(), &cfg.tol)?;
        sol.stats.proven_optimal = true;
        return Ok(sol);
    }
    let seed = extend_to_maximal(&oracle, &Support::empty())?;
    pool.insert(forbidden_support_cut(&seed, m));
    pool.record_forbidden(seed.clone());
    maximal.push(seed);

    let mut lower_bound = 0;
    let mut iteration = 0u64;
    loop {
        let out_of_time = deadline.is_some_and(|d| Instant::now() >= d);
        if iteration >= cfg.limits.max_iterations || out_of_time {
            return Err(Error::LimitReached {
                what: if out_of_time { "time" } else { "iteration" },
                bound: lower_bound,
                incumbent: None,
            });
        }
        iteration += 1;

        let mut ip = CoveringIp::new(m).max_nodes(cfg.limits.max_nodes).deadline(deadline);
        if cfg.fractional_separation {
            ip = ip.with_separation(&oracle);
        }
        let res = ip.solve(&mut pool)?;
        nodes += res.nodes;
        let support = match res.status {
            CoverIpStatus::Optimal(s) => s,
            CoverIpStatus::Infeasible => return Err(Error::ProblemInfeasible),
            CoverIpStatus::LimitReached(_) => {
                return Err(Error::LimitReached {
                    what: "node",
                    bound: lower_bound.max(res.bound),
                    incumbent: None,
                })
            }
        };
        lower_bound = lower_bound.max(support.len());

        if !oracle.is_forbidden(&support)? {
            trace.push(TraceRecord::Lazy {
                iteration,
                pool_size: pool.len(),
                ip_objective: support.len(),
                forbidden: false,
                cut: None,
            });
            let mut sol = recover_x(inst, &support, &cfg.tol)?;
            let stats = &mut sol.stats;
            stats.lower_bound = lower_bound;
            stats.proven_optimal = true;
            stats.nodes = nodes;
            stats.lp_calls += oracle.lp_calls();
            stats.iterations = iteration;
            stats.cuts = pool.cuts().to_vec();
            stats.maximal_supports = maximal;
            stats.trace = trace;
            return Ok(sol);
        }

        let extended = extend_to_maximal(&oracle, &support)?;
        let cut = forbidden_support_cut(&extended, m);
        pool.record_forbidden(extended.clone());
        maximal.push(extended);
        let label = cut.to_string();
        pool.insert(cut);
        if cfg.family_cuts {
            if let Some(fam) = pool.latest_family_cut(m) {
                pool.insert(fam);
            }
        }
        trace.push(TraceRecord::Lazy {
            iteration,
            pool_size: pool.len(),
            ip_objective: support.len(),
            forbidden: true,
            cut: Some(label),
        });
    }
}

/// Optimal coefficients on a fixed feasible support, embedded into `m`
/// entries. Coefficients the LP leaves at zero drop out of the support.
pub fn recover_x(inst: &Instance, support: &Support, tol: &Tolerances) -> Result<Solution> {
    support.check_within(inst.m())?;
    let oracle = SupportOracle::new(inst, *tol);
    let fit = oracle.fit(support)?;
    if fit.residual > inst.alpha() + tol.feas_tol {
        return Err(Error::Contract(format!(
            "support {{{support}}} is forbidden (residual {} > {})",
            fit.residual,
            inst.alpha()
        )));
    }
    let x = fit.embed(support, inst.m());
    let mut sol = Solution::from_x(inst, x, tol)?;
    if !sol.is_feasible(inst, tol) {
        return Err(Error::Contract(format!(
            "recovered coefficients have residual {} above the threshold",
            sol.residual
        )));
    }
    sol.stats.lp_calls = oracle.lp_calls();
    sol.stats.lower_bound = 0;
    Ok(sol)
}

fn indicator_support(b: &[f64]) -> Support {
    Support::from_indicator(&b.iter().map(|&v| v > 0.5).collect::<Vec<_>>())
}

/// Cuts that the given support violates.
pub fn violated_by<'a>(cuts: &'a [CoverInequality], support: &'a Support) -> impl Iterator<Item = &'a CoverInequality> {
    cuts.iter().filter(move |c| !c.is_satisfied_by(support))
}
