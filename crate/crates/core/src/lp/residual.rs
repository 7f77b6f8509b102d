//! Fixed-support residual minimization and the forbidden-support test.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use super::simplex::{simplex_solve, LpError, LpProblem, Relation};
use crate::model::{Instance, Norm, Support, Tolerances};

/// Optimum of `min ‖y − H^S x^S‖ₚ` over a fixed support `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFit {
    pub residual: f64,
    /// One coefficient per support index, in support order.
    pub coefficients: Vec<f64>,
    pub dual_objective: f64,
}

impl ResidualFit {
    pub fn duality_gap(&self) -> f64 {
        (self.residual - self.dual_objective).abs()
    }

    /// Embeds the restricted coefficients into a full `m`-vector.
    pub fn embed(&self, support: &Support, m: usize) -> Vec<f64> {
        let mut x = vec![0.0; m];
        for (&j, &v) in support.indices().iter().zip(&self.coefficients) {
            x[j] = v;
        }
        x
    }
}

/// Builds the residual LP over `S`: free coefficients, one nonnegative
/// residual bound per row (ℓ1) or a single shared one (ℓ∞).
pub fn residual_lp(inst: &Instance, support: &Support) -> LpProblem {
    let k = support.len();
    let n = inst.n();
    let n_w = match inst.norm() {
        Norm::L1 => n,
        Norm::LInf => 1,
    };
    let mut objective = vec![0.0; k + n_w];
    for c in &mut objective[k..] {
        *c = 1.0;
    }
    let mut lp = LpProblem::new(objective);
    for c in 0..k {
        lp.set_free(c);
    }
    for i in 0..n {
        let w = k + if n_w == 1 { 0 } else { i };
        let mut coeffs = vec![0.0; k + n_w];
        for (c, &j) in support.indices().iter().enumerate() {
            coeffs[c] = inst.h(i, j);
        }
        // y_i − h_i·x ≤ w and h_i·x − y_i ≤ w
        let mut upper = coeffs.clone();
        coeffs[w] = 1.0;
        upper[w] = -1.0;
        lp.add_row(coeffs, Relation::Ge, inst.y()[i]);
        lp.add_row(upper, Relation::Le, inst.y()[i]);
    }
    lp
}

pub fn min_residual(inst: &Instance, support: &Support) -> Result<ResidualFit, LpError> {
    if let Some(&j) = support.indices().last() {
        if j >= inst.m() {
            return Err(LpError::Malformed(format!("support index {} exceeds m = {}", j + 1, inst.m())));
        }
    }
    if support.is_empty() {
        let r = inst.y_norm();
        return Ok(ResidualFit {
            residual: r,
            coefficients: Vec::new(),
            dual_objective: r,
        });
    }
    let lp = residual_lp(inst, support);
    let out = simplex_solve(&lp)?;
    if !out.is_optimal() {
        // x = 0 with w = ‖y‖ is always feasible and the objective is ≥ 0.
        return Err(LpError::NumericalFailure(format!("residual LP reported {:?}", out.status)));
    }
    Ok(ResidualFit {
        residual: out.objective.max(0.0),
        coefficients: out.x[..support.len()].to_vec(),
        dual_objective: out.dual_objective,
    })
}

/// True iff no `x` supported on `S` reaches the threshold.
pub fn is_forbidden(inst: &Instance, support: &Support, tol: &Tolerances) -> Result<bool, LpError> {
    Ok(min_residual(inst, support)?.residual > inst.alpha() + tol.feas_tol)
}

/// Per-solve front end to [`min_residual`]: memoizes residuals by support
/// and counts the LPs actually solved.
#[derive(Debug)]
pub struct SupportOracle<'a> {
    inst: &'a Instance,
    tol: Tolerances,
    cache: RefCell<HashMap<Support, f64>>,
    calls: Cell<u64>,
    max_gap: Cell<f64>,
}

impl<'a> SupportOracle<'a> {
    pub fn new(inst: &'a Instance, tol: Tolerances) -> Self {
        SupportOracle {
            inst,
            tol,
            cache: RefCell::new(HashMap::new()),
            calls: Cell::new(0),
            max_gap: Cell::new(0.0),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn residual(&self, support: &Support) -> Result<f64, LpError> {
        if let Some(&r) = self.cache.borrow().get(support) {
            return Ok(r);
        }
        let fit = self.fit(support)?;
        self.cache.borrow_mut().insert(support.clone(), fit.residual);
        Ok(fit.residual)
    }

    /// Solves the residual LP without consulting the cache.
    pub fn fit(&self, support: &Support) -> Result<ResidualFit, LpError> {
        let fit = min_residual(self.inst, support)?;
        if !support.is_empty() {
            self.calls.set(self.calls.get() + 1);
        }
        self.max_gap.set(self.max_gap.get().max(fit.duality_gap()));
        Ok(fit)
    }

    pub fn is_forbidden(&self, support: &Support) -> Result<bool, LpError> {
        Ok(self.residual(support)? > self.inst.alpha() + self.tol.feas_tol)
    }

    pub fn lp_calls(&self) -> u64 {
        self.calls.get()
    }

    /// Largest primal/dual gap over every residual LP solved so far.
    pub fn max_duality_gap(&self) -> f64 {
        self.max_gap.get()
    }
}
