//! Problem data, supports, solutions and the feasibility semantics shared by
//! every solver.
//!
//! An [`Instance`] asks for the sparsest `x` with `‖y − Hx‖ₚ ≤ α`, where the
//! norm is either ℓ1 or ℓ∞. Column indices are stored 0-based; everything
//! user-facing renders them 1-based.

use std::fmt;

use serde::Serialize;

use crate::cuts::CoverInequality;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Norm {
    L1,
    LInf,
}

impl Norm {
    /// Norm of an arbitrary vector.
    pub fn apply(self, v: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            Norm::L1 => v.into_iter().map(f64::abs).sum(),
            Norm::LInf => v.into_iter().map(f64::abs).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::L1 => f.write_str("1"),
            Norm::LInf => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "l1" => Ok(Norm::L1),
            "inf" | "linf" | "infinity" => Ok(Norm::LInf),
            other => Err(format!("unsupported norm `{other}` (expected `1` or `inf`)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Magnitude at or below which a coefficient counts as zero.
    pub zero_tol: f64,
    /// Slack allowed in `residual ≤ α`.
    pub feas_tol: f64,
    pub float_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_tol: 1e-9,
            feas_tol: 1e-7,
            float_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.zero_tol) && ok(self.feas_tol) && ok(self.float_tol)) {
            return Err(Error::Config("tolerances must be finite and strictly positive".into()));
        }
        if self.zero_tol >= 1.0 {
            return Err(Error::Config("zero_tol must be below 1".into()));
        }
        Ok(())
    }
}

/// Dictionary `H` (n×m, row-major), observation `y`, norm and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    m: usize,
    h: Vec<f64>,
    y: Vec<f64>,
    norm: Norm,
    alpha: f64,
}

impl Instance {
    pub fn new(n: usize, m: usize, h: Vec<f64>, y: Vec<f64>, norm: Norm, alpha: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInstance(format!("need n ≥ 1 and m ≥ 1, got n = {n}, m = {m}")));
        }
        if h.len() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, found: h.len() });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: y.len() });
        }
        if let Some(pos) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "non-finite dictionary entry at row {}, column {}",
                pos / m + 1,
                pos % m + 1
            )));
        }
        if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance(format!("non-finite observation y{}", pos + 1)));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidInstance(format!("threshold must be finite and ≥ 0, got {alpha}")));
        }
        Ok(Instance { n, m, h, y, norm, alpha })
    }

    /// Builds an instance from the rows of `H`.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>, norm: Norm, alpha: f64) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, found: bad.len() });
        }
        Instance::new(n, m, rows.concat(), y, norm, alpha)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.h[i * self.m..(i + 1) * self.m]
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Instance::new(self.n, self.m, self.h.clone(), self.y.clone(), self.norm, alpha)
    }

    pub fn with_norm(&self, norm: Norm) -> Self {
        Instance { norm, ..self.clone() }
    }

    /// `‖y‖ₚ`, the residual of the empty support.
    pub fn y_norm(&self) -> f64 {
        self.norm.apply(self.y.iter().copied())
    }
}

/// A set of column indices, kept sorted and duplicate-free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Support(Vec<usize>);

impl Support {
    pub fn empty() -> Self {
        Support(Vec::new())
    }

    /// All columns `0..m`.
    pub fn full(m: usize) -> Self {
        Support((0..m).collect())
    }

    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Support(indices)
    }

    /// Builds a support from 1-based indices, as they appear in reports.
    pub fn from_one_based(indices: &[usize]) -> Self {
        assert!(indices.iter().all(|&j| j >= 1), "1-based index 0");
        Support::new(indices.iter().map(|&j| j - 1).collect())
    }

    pub fn from_indicator(b: &[bool]) -> Self {
        Support(b.iter().enumerate().filter(|(_, &on)| on).map(|(j, _)| j).collect())
    }

    pub fn from_mask(mask: u64, m: usize) -> Self {
        Support((0..m).filter(|&j| mask >> j & 1 == 1).collect())
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &j| {
            assert!(j < 64, "mask representation needs indices < 64");
            acc | 1 << j
        })
    }

    pub fn indicator(&self, m: usize) -> Vec<bool> {
        let mut b = vec![false; m];
        for &j in &self.0 {
            b[j] = true;
        }
        b
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn with(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&j) {
            v.insert(pos, j);
        }
        Support(v)
    }

    pub fn without(&self, j: usize) -> Self {
        Support(self.0.iter().copied().filter(|&k| k != j).collect())
    }

    pub fn is_subset_of(&self, other: &Support) -> bool {
        self.0.iter().all(|&j| other.contains(j))
    }

    /// Columns of `0..m` outside the support.
    pub fn complement(&self, m: usize) -> Vec<usize> {
        (0..m).filter(|&j| !self.contains(j)).collect()
    }

    pub fn intersects(&self, other: &Support) -> bool {
        self.0.iter().any(|&j| other.contains(j))
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&j| j + 1).collect()
    }

    pub fn check_within(&self, m: usize) -> Result<()> {
        match self.0.last() {
            Some(&j) if j >= m => Err(Error::Contract(format!("support index {} exceeds m = {m}", j + 1))),
            _ => Ok(()),
        }
    }
}

/// Renders 1-based, space separated; `-` for the empty support.
impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (k, j) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", j + 1)?;
        }
        Ok(())
    }
}

/// One line of a solver trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    /// One iteration of the two-stage lazy loop.
    Lazy {
        iteration: u64,
        pool_size: usize,
        ip_objective: usize,
        forbidden: bool,
        cut: Option<String>,
    },
    /// One processed branch-and-cut node.
    Node {
        node: u64,
        depth: usize,
        bound: f64,
        fractional: usize,
        cuts_added: usize,
    },
    /// One neighborhood exploration of the VNS loop.
    Neighborhood {
        delta: usize,
        improved: bool,
        incumbent_size: usize,
        proven: bool,
    },
}

/// An incumbent accepted by the branch and cut, with its largest coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncumbentRecord {
    pub objective: usize,
    pub max_abs_x: f64,
    pub big_m: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Valid lower bound on the optimal support size.
    pub lower_bound: usize,
    pub proven_optimal: bool,
    pub nodes: u64,
    pub lp_calls: u64,
    pub iterations: u64,
    /// Every cut that entered the pool during the solve.
    pub cuts: Vec<CoverInequality>,
    /// Forbidden supports produced by maximal extension, in generation order.
    pub maximal_supports: Vec<Support>,
    pub incumbents: Vec<IncumbentRecord>,
    pub big_m: Option<f64>,
    /// Size of the starting support (VNS only).
    pub initial_objective: Option<usize>,
    pub warnings: Vec<String>,
    pub trace: Vec<TraceRecord>,
}

/// A full coefficient vector together with its support and residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub support: Support,
    pub residual: f64,
    pub objective: usize,
    pub stats: SolveStats,
}

impl Solution {
    pub fn from_x(inst: &Instance, x: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let residual = residual_norm(inst, &x)?;
        let support = support_of(&x, tol);
        Ok(Solution {
            objective: support.len(),
            x,
            support,
            residual,
            stats: SolveStats::default(),
        })
    }

    pub fn is_feasible(&self, inst: &Instance, tol: &Tolerances) -> bool {
        self.residual <= inst.alpha() + tol.feas_tol
    }
}

/// `‖y − Hx‖ₚ`.
pub fn residual_norm(inst: &Instance, x: &[f64]) -> Result<f64> {
    if x.len() != inst.m() {
        return Err(Error::DimensionMismatch { expected: inst.m(), found: x.len() });
    }
    let r = (0..inst.n()).map(|i| {
        let hx: f64 = inst.row(i).iter().zip(x).map(|(h, v)| h * v).sum();
        inst.y()[i] - hx
    });
    Ok(inst.norm().apply(r))
}

/// Columns with `|x_j| > zero_tol`.
pub fn support_of(x: &[f64], tol: &Tolerances) -> Support {
    Support(
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > tol.zero_tol)
            .map(|(j, _)| j)
            .collect(),
    )
}

pub fn is_feasible(inst: &Instance, x: &[f64], tol: &Tolerances) -> Result<bool> {
    Ok(residual_norm(inst, x)? <= inst.alpha() + tol.feas_tol)
}
