//! Method dispatch and the comparison harness.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::bnc::{solve_branch_and_cut, BncConfig};
use crate::brute::brute_force_solve;
use crate::covering::{solve_two_stage, TwoStageConfig};
use crate::error::{Error, Result};
use crate::heuristic::{vns_solve, VnsConfig};
use crate::model::{Instance, Solution, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Cover,
    Bnc,
    Vns,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Brute, Method::Cover, Method::Bnc, Method::Vns];

    /// Whether the method certifies optimality.
    pub fn is_exact(self) -> bool {
        !matches!(self, Method::Vns)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Cover => "cover",
            Method::Bnc => "bnc",
            Method::Vns => "vns",
        }
    }

    /// Solves with the method's default configuration.
    pub fn solve(self, inst: &Instance, tol: &Tolerances) -> Result<Solution> {
        match self {
            Method::Brute => brute_force_solve(inst, tol),
            Method::Cover => solve_two_stage(inst, &TwoStageConfig { tol: *tol, ..Default::default() }),
            Method::Bnc => solve_branch_and_cut(inst, &BncConfig { tol: *tol, ..Default::default() }),
            Method::Vns => vns_solve(inst, &VnsConfig { tol: *tol, ..VnsConfig::for_size(inst.m()) }),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected brute, cover, bnc or vns)"))
    }
}

/// Comma-separated method list, e.g. `brute,cover,bnc`.
pub fn parse_methods(list: &str) -> std::result::Result<Vec<Method>, String> {
    let mut methods = list
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<std::result::Result<Vec<Method>, _>>()?;
    methods.sort();
    methods.dedup();
    Ok(methods)
}

/// One (instance, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub method: Method,
    /// `ok`, `infeasible`, `limit` or `error`.
    pub status: String,
    pub objective: Option<usize>,
    pub bound: Option<usize>,
    pub residual: Option<f64>,
    pub feasible: bool,
    pub nodes: u64,
    pub cuts: usize,
    pub lp_calls: u64,
    pub millis: u64,
}

impl BenchRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bench records serialize")
    }

    /// JSON without the wall-clock field, for reproducibility checks.
    pub fn to_json_without_timing(&self) -> String {
        let mut value = serde_json::to_value(self).expect("bench records serialize");
        value.as_object_mut().expect("record is an object").remove("millis");
        value.to_string()
    }
}

pub fn run_cell(name: &str, inst: &Instance, method: Method, tol: &Tolerances) -> BenchRecord {
    let start = Instant::now();
    let result = method.solve(inst, tol);
    let millis = start.elapsed().as_millis() as u64;
    let mut record = BenchRecord {
        instance: name.to_string(),
        method,
        status: "ok".into(),
        objective: None,
        bound: None,
        residual: None,
        feasible: false,
        nodes: 0,
        cuts: 0,
        lp_calls: 0,
        millis,
    };
    match result {
        Ok(sol) => {
            record.objective = Some(sol.objective);
            record.bound = Some(sol.stats.lower_bound);
            record.residual = Some(sol.residual);
            record.feasible = sol.is_feasible(inst, tol);
            record.nodes = sol.stats.nodes;
            record.cuts = sol.stats.cuts.len();
            record.lp_calls = sol.stats.lp_calls;
        }
        Err(Error::ProblemInfeasible) => record.status = "infeasible".into(),
        Err(Error::LimitReached { bound, incumbent, .. }) => {
            record.status = "limit".into();
            record.bound = Some(bound);
            if let Some(sol) = incumbent {
                record.objective = Some(sol.objective);
                record.residual = Some(sol.residual);
                record.feasible = sol.is_feasible(inst, tol);
            }
        }
        Err(_) => record.status = "error".into(),
    }
    record
}

/// Per-method totals over a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub solved: usize,
    pub total: usize,
    pub objective_sum: usize,
    pub nodes: u64,
    pub cuts: usize,
    pub lp_calls: u64,
    pub millis: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Ordered by instance, then method.
    pub records: Vec<BenchRecord>,
    pub summaries: Vec<MethodSummary>,
}

impl BenchReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let fmt_opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
        writeln!(
            out,
            "{:<28} {:<6} {:<10} {:>5} {:>5} {:>12} {:>8} {:>6} {:>8} {:>8}",
            "instance", "method", "status", "obj", "bound", "residual", "nodes", "cuts", "lp", "ms"
        )
        .unwrap();
        for r in &self.records {
            writeln!(
                out,
                "{:<28} {:<6} {:<10} {:>5} {:>5} {:>12} {:>8} {:>6} {:>8} {:>8}",
                r.instance,
                r.method,
                r.status,
                fmt_opt(r.objective),
                fmt_opt(r.bound),
                r.residual.map_or("-".to_string(), |v| format!("{v:.4e}")),
                r.nodes,
                r.cuts,
                r.lp_calls,
                r.millis
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(
            out,
            "{:<6} {:>7} {:>8} {:>10} {:>8} {:>10} {:>10}",
            "method", "solved", "sum obj", "nodes", "cuts", "lp", "ms"
        )
        .unwrap();
        for s in &self.summaries {
            writeln!(
                out,
                "{:<6} {:>3}/{:<3} {:>8} {:>10} {:>8} {:>10} {:>10}",
                s.method, s.solved, s.total, s.objective_sum, s.nodes, s.cuts, s.lp_calls, s.millis
            )
            .unwrap();
        }
        out
    }
}

/// Runs every method on every instance and fails loudly if exact methods
/// disagree on an objective.
pub fn run_bench(instances: &[(String, Instance)], methods: &[Method], tol: &Tolerances) -> Result<BenchReport> {
    let mut records = Vec::with_capacity(instances.len() * methods.len());
    for (name, inst) in instances {
        let cells: Vec<BenchRecord> = methods.iter().map(|&m| run_cell(name, inst, m, tol)).collect();
        check_agreement(&cells)?;
        records.extend(cells);
    }
    let summaries = methods
        .iter()
        .map(|&method| {
            let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.method == method).collect();
            let solved: Vec<&&BenchRecord> = rows.iter().filter(|r| r.status == "ok").collect();
            MethodSummary {
                method,
                solved: solved.len(),
                total: rows.len(),
                objective_sum: solved.iter().filter_map(|r| r.objective).sum(),
                nodes: rows.iter().map(|r| r.nodes).sum(),
                cuts: rows.iter().map(|r| r.cuts).sum(),
                lp_calls: rows.iter().map(|r| r.lp_calls).sum(),
                millis: rows.iter().map(|r| r.millis).sum(),
            }
        })
        .collect();
    Ok(BenchReport { records, summaries })
}

fn check_agreement(cells: &[BenchRecord]) -> Result<()> {
    let exact: Vec<&BenchRecord> = cells
        .iter()
        .filter(|r| r.method.is_exact() && matches!(r.status.as_str(), "ok" | "infeasible"))
        .collect();
    let Some(first) = exact.first() else { return Ok(()) };
    for r in &exact[1..] {
        if r.objective != first.objective {
            let show = |r: &BenchRecord| r.objective.map_or("infeasible".to_string(), |v| v.to_string());
            return Err(Error::Disagreement(format!(
                "instance {}: {} found {}, {} found {}",
                r.instance,
                first.method,
                show(first),
                r.method,
                show(r)
            )));
        }
    }
    Ok(())
}
