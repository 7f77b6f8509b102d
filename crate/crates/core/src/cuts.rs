//! Covering inequalities over the support indicators `b`.
//!
//! A forbidden support `J` (no `x` on `J` meets the threshold) yields
//! `Σ_{j∉J} b_j ≥ 1`. A family of forbidden supports yields
//! `2·Σ_{j∈none} b_j + Σ_{j∈some} b_j ≥ 2`, where `none` holds the columns
//! outside every member and `some` the columns in some but not all members.
//! Both shapes are stored as [`CoverInequality`].

use std::collections::HashSet;
use std::fmt;

use crate::brute::FeasibilityTable;
use crate::error::{Error, Result};
use crate::lp::SupportOracle;
use crate::model::{Instance, Support, Tolerances};

/// Smallest violation for which separation emits a cut.
pub const VIOLATION_TOL: f64 = 1e-6;

/// `2·Σ_{twos} b_j + Σ_{ones} b_j ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverInequality {
    twos: Vec<usize>,
    ones: Vec<usize>,
    rhs: u32,
}

impl CoverInequality {
    pub fn new(twos: Vec<usize>, ones: Vec<usize>, rhs: u32) -> Self {
        let twos = Support::new(twos).indices().to_vec();
        let ones: Vec<usize> = Support::new(ones).indices().iter().copied().filter(|j| !twos.contains(j)).collect();
        CoverInequality { twos, ones, rhs }
    }

    pub fn twos(&self) -> &[usize] {
        &self.twos
    }

    pub fn ones(&self) -> &[usize] {
        &self.ones
    }

    pub fn rhs(&self) -> u32 {
        self.rhs
    }

    pub fn lhs(&self, b: &[f64]) -> f64 {
        2.0 * self.twos.iter().map(|&j| b[j]).sum::<f64>() + self.ones.iter().map(|&j| b[j]).sum::<f64>()
    }

    /// `rhs − lhs`; positive when `b` violates the cut.
    pub fn violation(&self, b: &[f64]) -> f64 {
        f64::from(self.rhs) - self.lhs(b)
    }

    pub fn is_satisfied_by(&self, support: &Support) -> bool {
        let lhs = 2 * self.twos.iter().filter(|&&j| support.contains(j)).count()
            + self.ones.iter().filter(|&&j| support.contains(j)).count();
        lhs >= self.rhs as usize
    }

    pub fn is_satisfied_by_mask(&self, mask: u64) -> bool {
        let hits = |set: &[usize]| set.iter().filter(|&&j| mask >> j & 1 == 1).count();
        2 * hits(&self.twos) + hits(&self.ones) >= self.rhs as usize
    }

    /// Dense coefficient vector over `m` indicators.
    pub fn coefficients(&self, m: usize) -> Vec<f64> {
        let mut c = vec![0.0; m];
        for &j in &self.twos {
            c[j] = 2.0;
        }
        for &j in &self.ones {
            c[j] = 1.0;
        }
        c
    }
}

/// Renders as e.g. `2*b4 + b2 + b3 >= 2`, 1-based.
impl fmt::Display for CoverInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .twos
            .iter()
            .map(|j| format!("2*b{}", j + 1))
            .chain(self.ones.iter().map(|j| format!("b{}", j + 1)))
            .collect();
        if terms.is_empty() {
            write!(f, "0 >= {}", self.rhs)
        } else {
            write!(f, "{} >= {}", terms.join(" + "), self.rhs)
        }
    }
}

/// Deduplicated cut store shared by the exact solvers, plus the history of
/// forbidden supports the cuts came from.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<CoverInequality>,
    seen: HashSet<CoverInequality>,
    activity: Vec<u64>,
    forbidden: Vec<Support>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the cut unless an identical one is stored. Returns whether it was new.
    pub fn insert(&mut self, cut: CoverInequality) -> bool {
        if self.seen.contains(&cut) {
            return false;
        }
        self.seen.insert(cut.clone());
        self.cuts.push(cut);
        self.activity.push(0);
        true
    }

    pub fn cuts(&self) -> &[CoverInequality] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// How often the cut at `idx` was found violated during separation.
    pub fn activity(&self, idx: usize) -> u64 {
        self.activity[idx]
    }

    pub fn record_forbidden(&mut self, support: Support) {
        self.forbidden.push(support);
    }

    pub fn forbidden_history(&self) -> &[Support] {
        &self.forbidden
    }

    pub fn is_satisfied_by(&self, support: &Support) -> bool {
        self.cuts.iter().all(|c| c.is_satisfied_by(support))
    }

    /// Family cut from the newest recorded forbidden support and the most
    /// recent earlier one sharing a column with it.
    pub fn latest_family_cut(&self, m: usize) -> Option<CoverInequality> {
        let (newest, older) = self.forbidden.split_last()?;
        let partner = older.iter().rev().find(|s| s.intersects(newest) && *s != newest)?;
        Some(family_cut(&[newest.clone(), partner.clone()], m))
    }

    fn scan_violated(&mut self, b: &[f64]) -> Vec<CoverInequality> {
        let mut out = Vec::new();
        for (idx, cut) in self.cuts.iter().enumerate() {
            if cut.violation(b) >= VIOLATION_TOL {
                self.activity[idx] += 1;
                out.push(cut.clone());
            }
        }
        out
    }
}

/// `Σ_{j∉J} b_j ≥ 1` for a certified forbidden `J`.
pub fn forbidden_support_cut(j: &Support, m: usize) -> CoverInequality {
    CoverInequality::new(Vec::new(), j.complement(m), 1)
}

/// Coefficient-2 cut of a family of certified forbidden supports.
pub fn family_cut(family: &[Support], m: usize) -> CoverInequality {
    assert!(!family.is_empty(), "family cut needs at least one member");
    let union: HashSet<usize> = family.iter().flat_map(|s| s.indices().iter().copied()).collect();
    let inter: Vec<usize> = family[0]
        .indices()
        .iter()
        .copied()
        .filter(|&j| family.iter().all(|s| s.contains(j)))
        .collect();
    let none: Vec<usize> = (0..m).filter(|j| !union.contains(j)).collect();
    let some: Vec<usize> = (0..m).filter(|j| union.contains(j) && !inter.contains(j)).collect();
    CoverInequality::new(none, some, 2)
}

/// Grows a forbidden `J` until every single-column extension is feasible.
///
/// Columns are tried in ascending order of the residual drop they cause on
/// their own, ties by index; each accepted column is re-certified.
pub fn extend_to_maximal(oracle: &SupportOracle<'_>, j: &Support) -> Result<Support> {
    let inst = oracle.instance();
    j.check_within(inst.m())?;
    let base = oracle.residual(j)?;
    if base <= inst.alpha() + oracle.tolerances().feas_tol {
        return Err(Error::Contract(format!("support {{{j}}} is not forbidden")));
    }
    let mut order = Vec::new();
    for k in j.complement(inst.m()) {
        order.push((base - oracle.residual(&j.with(k))?, k));
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut current = j.clone();
    for (_, k) in order {
        let next = current.with(k);
        if oracle.is_forbidden(&next)? {
            current = next;
        }
    }
    Ok(current)
}

/// Heuristic separation at a fractional point `b`.
///
/// Returns the violated pool cuts plus any new certified cuts, which are
/// also inserted into the pool. Every returned cut is violated by at least
/// [`VIOLATION_TOL`].
pub fn separate(b: &[f64], oracle: &SupportOracle<'_>, pool: &mut CutPool) -> Result<Vec<CoverInequality>> {
    let m = oracle.instance().m();
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: b.len() });
    }
    let float_tol = oracle.tolerances().float_tol;
    let mut out = pool.scan_violated(b);

    // Shortest prefix of the columns sorted by b (descending) whose
    // complement weighs less than one.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&p, &q| b[q].total_cmp(&b[p]).then(p.cmp(&q)));
    let mut rest: f64 = b.iter().sum();
    let mut prefix = 0;
    while rest >= 1.0 - float_tol && prefix < m {
        rest -= b[order[prefix]];
        prefix += 1;
    }

    let mut members: Vec<usize> = order[..prefix].to_vec();
    let mut found = oracle.is_forbidden(&Support::new(members.clone()))?;
    // Drop the weakest members while the cut stays violated, looking for a
    // forbidden subset.
    while !found {
        let Some(&last) = members.last() else { break };
        if rest + b[last] >= 1.0 - VIOLATION_TOL {
            break;
        }
        members.pop();
        rest += b[last];
        found = oracle.is_forbidden(&Support::new(members.clone()))?;
    }

    if found {
        let maximal = extend_to_maximal(oracle, &Support::new(members))?;
        let cut = forbidden_support_cut(&maximal, m);
        pool.record_forbidden(maximal);
        if cut.violation(b) >= VIOLATION_TOL && pool.insert(cut.clone()) {
            out.push(cut);
        }
        if let Some(fam) = pool.latest_family_cut(m) {
            if fam.violation(b) >= VIOLATION_TOL && pool.insert(fam.clone()) {
                out.push(fam);
            }
        }
    }
    Ok(out)
}

/// Checks a cut against every feasible support by enumeration (`m ≤ 24`).
pub fn cut_is_valid(cut: &CoverInequality, inst: &Instance, tol: &Tolerances) -> Result<bool> {
    Ok(FeasibilityTable::enumerate(inst, tol)?.cut_is_valid(cut))
}
