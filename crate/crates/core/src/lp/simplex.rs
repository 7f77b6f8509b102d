//! Dense two-phase primal simplex over bounded variables.
//!
//! Every row `a·x (≤|≥|=) b` gets a slack `s` with `a·x + s = b`, so the
//! working system is an equality system over variables that each carry
//! their own (possibly infinite) bounds. Free variables stay free; they
//! rest at zero while nonbasic. Rows whose slack cannot absorb the initial
//! residual receive an artificial column, and phase one drives those to
//! zero before phase two optimizes the real objective.
//!
//! Pricing is Dantzig's largest reduced cost. After a run of degenerate
//! pivots the solver switches to Bland's rule for the rest of the phase,
//! which rules out cycling. The tableau is rebuilt from the basis by
//! Gauss-Jordan elimination periodically and before anything is reported,
//! and every optimum ships with a dual certificate.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min c·x` subject to linear rows and per-variable bounds.
///
/// Variables default to `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> usize {
        assert_eq!(coeffs.len(), self.num_vars(), "row length must match the variable count");
        self.rows.push(Row { coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn add_sparse_row(&mut self, entries: &[(usize, f64)], relation: Relation, rhs: f64) -> usize {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, v) in entries {
            coeffs[j] += v;
        }
        self.add_row(coeffs, relation, rhs)
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.objective.is_empty() {
            return Err(LpError::Malformed("at least one variable is required".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (j, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("invalid bounds [{l}, {u}] on variable {j}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("non-finite data in row {i}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal point; for `Infeasible`, the phase-one end point.
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per row. For `Infeasible`, the phase-one multipliers
    /// (a Farkas-type certificate).
    pub duals: Vec<f64>,
    pub dual_objective: f64,
    /// Direction of unbounded descent, for `Unbounded`.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("LP numerical failure: {0}")]
    NumericalFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Bound/row violation tolerated in a primal solution.
    pub feas_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub opt_tol: f64,
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tol: f64,
    /// Largest accepted `|primal − dual|` objective gap.
    pub duality_tol: f64,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_budget: usize,
    /// Pivots between two tableau rebuilds.
    pub refactor_every: usize,
    /// Iteration cap; `None` derives one from the problem size.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-9,
            duality_tol: 1e-7,
            degenerate_budget: 50,
            refactor_every: 100,
            max_iterations: None,
        }
    }
}

pub fn simplex_solve(prob: &LpProblem) -> Result<LpOutcome, LpError> {
    simplex_solve_with(prob, &SimplexOptions::default())
}

pub fn simplex_solve_with(prob: &LpProblem, opts: &SimplexOptions) -> Result<LpOutcome, LpError> {
    prob.validate()?;
    let nv = prob.num_vars();
    let nr = prob.num_rows();

    if let Some(j) = (0..nv).find(|&j| prob.lower[j] > prob.upper[j]) {
        let _ = j;
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            x: vec![0.0; nv],
            objective: f64::NAN,
            duals: vec![0.0; nr],
            dual_objective: f64::NAN,
            ray: None,
            iterations: 0,
        });
    }

    let mut tab = Tableau::build(prob, opts);
    let limit = opts.max_iterations.unwrap_or(50 * (tab.nr + tab.nc) + 1000);

    // Phase one: minimize the sum of artificials.
    if tab.nc > tab.n_real {
        let mut cost = vec![0.0; tab.nc];
        for c in &mut cost[tab.n_real..] {
            *c = 1.0;
        }
        tab.set_cost(cost)?;
        match tab.run(limit)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded(_) => {
                return Err(LpError::NumericalFailure("phase one reported an unbounded ray".into()));
            }
        }
        let infeas: f64 = tab.x[tab.n_real..].iter().sum();
        let scale = 1.0 + tab.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeas > opts.feas_tol * scale {
            let duals = tab.duals();
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                x: tab.x[..nv].to_vec(),
                objective: f64::NAN,
                duals,
                dual_objective: f64::NAN,
                ray: None,
                iterations: tab.iterations,
            });
        }
        // Freeze artificials at zero; basic ones leave on the first pivot
        // that touches their row.
        for j in tab.n_real..tab.nc {
            tab.upper[j] = 0.0;
            tab.x[j] = 0.0;
            if !matches!(tab.status[j], Status::Basic(_)) {
                tab.status[j] = Status::AtLower;
            }
        }
        tab.bland = false;
        tab.degenerate_run = 0;
    }

    let mut cost = vec![0.0; tab.nc];
    cost[..nv].copy_from_slice(&prob.objective);
    tab.set_cost(cost)?;
    match tab.run(limit)? {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded(ray) => {
            return Ok(LpOutcome {
                status: LpStatus::Unbounded,
                x: tab.x[..nv].to_vec(),
                objective: f64::NEG_INFINITY,
                duals: vec![0.0; nr],
                dual_objective: f64::NEG_INFINITY,
                ray: Some(ray[..nv].to_vec()),
                iterations: tab.iterations,
            });
        }
    }
    tab.certify(prob, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

enum PhaseEnd {
    Optimal,
    Unbounded(Vec<f64>),
}

struct Tableau {
    nr: usize,
    /// Structural plus slack columns.
    n_real: usize,
    nc: usize,
    n_struct: usize,
    /// Original equality matrix, row-major `nr × nc`.
    a: Vec<f64>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// `B⁻¹ a`, row-major `nr × nc`.
    t: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    x: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    opts: SimplexOptions,
    bland: bool,
    degenerate_run: usize,
    since_refactor: usize,
    iterations: usize,
}

impl Tableau {
    fn build(prob: &LpProblem, opts: &SimplexOptions) -> Self {
        let nv = prob.num_vars();
        let nr = prob.num_rows();
        let n_real = nv + nr;

        let mut lower = prob.lower.clone();
        let mut upper = prob.upper.clone();
        let mut x = vec![0.0; n_real];
        let mut status = vec![Status::AtLower; n_real];
        for j in 0..nv {
            let (l, u) = (lower[j], upper[j]);
            if l.is_finite() {
                x[j] = l;
                status[j] = Status::AtLower;
            } else if u.is_finite() {
                x[j] = u;
                status[j] = Status::AtUpper;
            } else {
                status[j] = Status::Free;
            }
        }
        for row in &prob.rows {
            let (l, u) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }

        // Decide per row whether the slack can start basic.
        let mut basis = Vec::with_capacity(nr);
        let mut artificials: Vec<(usize, f64)> = Vec::new();
        for (i, row) in prob.rows.iter().enumerate() {
            let s = nv + i;
            let r = row.rhs - row.coeffs.iter().zip(&x[..nv]).map(|(a, v)| a * v).sum::<f64>();
            if r >= lower[s] - opts.feas_tol && r <= upper[s] + opts.feas_tol {
                x[s] = r;
                status[s] = Status::Basic(i);
                basis.push(s);
            } else {
                let v = r.clamp(lower[s], upper[s]);
                x[s] = v;
                status[s] = if v == lower[s] { Status::AtLower } else { Status::AtUpper };
                let col = n_real + artificials.len();
                artificials.push((i, (r - v).signum()));
                basis.push(col);
            }
        }

        let nc = n_real + artificials.len();
        let mut a = vec![0.0; nr * nc];
        for (i, row) in prob.rows.iter().enumerate() {
            a[i * nc..i * nc + nv].copy_from_slice(&row.coeffs);
            a[i * nc + nv + i] = 1.0;
        }
        for (k, &(i, sign)) in artificials.iter().enumerate() {
            a[i * nc + n_real + k] = sign;
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(0.0);
            status.push(Status::Basic(i));
        }

        let mut tab = Tableau {
            nr,
            n_real,
            nc,
            n_struct: nv,
            a,
            b: prob.rows.iter().map(|r| r.rhs).collect(),
            lower,
            upper,
            t: vec![0.0; nr * nc],
            basis,
            status,
            x,
            cost: vec![0.0; nc],
            d: vec![0.0; nc],
            opts: *opts,
            bland: false,
            degenerate_run: 0,
            since_refactor: 0,
            iterations: 0,
        };
        // The starting basis is a signed identity, so this cannot fail.
        tab.refactor().expect("initial basis is nonsingular");
        tab
    }

    fn set_cost(&mut self, cost: Vec<f64>) -> Result<(), LpError> {
        self.cost = cost;
        self.refactor()
    }

    /// Rebuilds `t`, the basic values and the reduced costs from scratch.
    fn refactor(&mut self) -> Result<(), LpError> {
        let (nr, nc) = (self.nr, self.nc);
        let width = nc + 1;
        let mut w = vec![0.0; nr * width];
        for i in 0..nr {
            w[i * width..i * width + nc].copy_from_slice(&self.a[i * nc..(i + 1) * nc]);
            let mut rhs = self.b[i];
            for j in 0..nc {
                if !matches!(self.status[j], Status::Basic(_)) && self.x[j] != 0.0 {
                    rhs -= self.a[i * nc + j] * self.x[j];
                }
            }
            w[i * width + nc] = rhs;
        }

        let mut used = vec![false; nr];
        let mut new_basis = vec![usize::MAX; nr];
        for &q in &self.basis.clone() {
            let mut best = None;
            let mut best_abs = 0.0;
            for r in (0..nr).filter(|&r| !used[r]) {
                let v = w[r * width + q].abs();
                if v > best_abs {
                    best_abs = v;
                    best = Some(r);
                }
            }
            let r = match best {
                Some(r) if best_abs > 1e-11 => r,
                _ => return Err(LpError::NumericalFailure("singular basis during refactorization".into())),
            };
            let p = w[r * width + q];
            for v in &mut w[r * width..(r + 1) * width] {
                *v /= p;
            }
            let pivot_row = w[r * width..(r + 1) * width].to_vec();
            for i in (0..nr).filter(|&i| i != r) {
                let f = w[i * width + q];
                if f != 0.0 {
                    for (dst, src) in w[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                        *dst -= f * src;
                    }
                    w[i * width + q] = 0.0;
                }
            }
            used[r] = true;
            new_basis[r] = q;
        }

        for i in 0..nr {
            self.t[i * nc..(i + 1) * nc].copy_from_slice(&w[i * width..i * width + nc]);
            let q = new_basis[i];
            self.x[q] = w[i * width + nc];
            self.status[q] = Status::Basic(i);
        }
        self.basis = new_basis;
        self.recompute_reduced_costs();
        self.since_refactor = 0;
        Ok(())
    }

    fn recompute_reduced_costs(&mut self) {
        let nc = self.nc;
        self.d.copy_from_slice(&self.cost);
        for (r, &q) in self.basis.iter().enumerate() {
            let cb = self.cost[q];
            if cb != 0.0 {
                for (dj, tj) in self.d.iter_mut().zip(&self.t[r * nc..(r + 1) * nc]) {
                    *dj -= cb * tj;
                }
            }
        }
    }

    /// Entering candidate and its direction of motion.
    fn price(&self) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.nc {
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = match self.status[j] {
                Status::Basic(_) => continue,
                Status::AtLower if dj < -tol => 1.0,
                Status::AtUpper if dj > tol => -1.0,
                Status::Free if dj.abs() > tol => -dj.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn run(&mut self, limit: usize) -> Result<PhaseEnd, LpError> {
        let mut restarts = 0;
        loop {
            let Some((q, dir)) = self.price() else {
                // Confirm optimality on a freshly rebuilt tableau.
                if self.since_refactor == 0 {
                    return Ok(PhaseEnd::Optimal);
                }
                self.refactor()?;
                restarts += 1;
                if restarts > 5 {
                    return Err(LpError::NumericalFailure("reduced costs unstable across rebuilds".into()));
                }
                continue;
            };
            if self.iterations >= limit {
                return Err(LpError::NumericalFailure(format!("iteration limit {limit} reached")));
            }
            self.iterations += 1;
            if let Some(ray) = self.step(q, dir)? {
                return Ok(PhaseEnd::Unbounded(ray));
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
        }
    }

    /// One ratio test plus pivot or bound flip. Returns a ray when the
    /// entering variable can move forever.
    fn step(&mut self, q: usize, dir: f64) -> Result<Option<Vec<f64>>, LpError> {
        let nc = self.nc;
        let ptol = self.opts.pivot_tol;

        let mut limit = f64::INFINITY;
        let mut leave: Option<(usize, bool)> = None; // (row, hits lower)
        let mut leave_pivot = 0.0;
        for r in 0..self.nr {
            let alpha = self.t[r * nc + q];
            if alpha.abs() <= ptol {
                continue;
            }
            let k = self.basis[r];
            let delta = -dir * alpha;
            let (ratio, to_lower) = if delta < 0.0 {
                if !self.lower[k].is_finite() {
                    continue;
                }
                (((self.x[k] - self.lower[k]) / -delta).max(0.0), true)
            } else {
                if !self.upper[k].is_finite() {
                    continue;
                }
                (((self.upper[k] - self.x[k]) / delta).max(0.0), false)
            };
            let better = match leave {
                None => true,
                Some((lr, _)) => {
                    if ratio < limit - 1e-12 {
                        true
                    } else if ratio <= limit + 1e-12 {
                        if self.bland {
                            k < self.basis[lr]
                        } else {
                            alpha.abs() > leave_pivot
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                limit = limit.min(ratio);
                leave = Some((r, to_lower));
                leave_pivot = alpha.abs();
            }
        }

        let span = self.upper[q] - self.lower[q];
        let flip = span.is_finite() && span <= limit;
        if leave.is_none() && !flip {
            let mut ray = vec![0.0; nc];
            ray[q] = dir;
            for r in 0..self.nr {
                ray[self.basis[r]] = -dir * self.t[r * nc + q];
            }
            return Ok(Some(ray));
        }

        let step = if flip { span } else { limit };
        if step <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > self.opts.degenerate_budget {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        if step != 0.0 {
            self.x[q] += dir * step;
            for r in 0..self.nr {
                let alpha = self.t[r * nc + q];
                if alpha != 0.0 {
                    let k = self.basis[r];
                    self.x[k] -= dir * step * alpha;
                }
            }
        }

        if flip {
            let at_upper = dir > 0.0;
            self.status[q] = if at_upper { Status::AtUpper } else { Status::AtLower };
            self.x[q] = if at_upper { self.upper[q] } else { self.lower[q] };
            return Ok(None);
        }

        let (r, to_lower) = leave.expect("leaving row exists when no flip");
        let k = self.basis[r];
        self.x[k] = if to_lower { self.lower[k] } else { self.upper[k] };
        self.status[k] = if to_lower { Status::AtLower } else { Status::AtUpper };
        self.pivot(r, q);
        Ok(None)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.nc;
        let p = self.t[r * nc + q];
        for v in &mut self.t[r * nc..(r + 1) * nc] {
            *v /= p;
        }
        let pivot_row = self.t[r * nc..(r + 1) * nc].to_vec();
        for i in (0..self.nr).filter(|&i| i != r) {
            let f = self.t[i * nc + q];
            if f != 0.0 {
                for (dst, src) in self.t[i * nc..(i + 1) * nc].iter_mut().zip(&pivot_row) {
                    *dst -= f * src;
                }
                self.t[i * nc + q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dst, src) in self.d.iter_mut().zip(&pivot_row) {
                *dst -= f * src;
            }
            self.d[q] = 0.0;
        }
        self.basis[r] = q;
        self.status[q] = Status::Basic(r);
        self.since_refactor += 1;
    }

    /// Row multipliers `y = c_B B⁻¹`, read off the slack reduced costs.
    fn duals(&self) -> Vec<f64> {
        (0..self.nr).map(|i| -self.d[self.n_struct + i]).collect()
    }

    fn certify(&mut self, prob: &LpProblem, opts: &SimplexOptions) -> Result<LpOutcome, LpError> {
        if self.since_refactor != 0 {
            self.refactor()?;
        }
        let (nv, nr, nc) = (self.n_struct, self.nr, self.nc);

        // Primal feasibility on the original data.
        let mut x = self.x[..nv].to_vec();
        for (j, xj) in x.iter_mut().enumerate() {
            let (l, u) = (prob.lower[j], prob.upper[j]);
            let slack = opts.feas_tol.max(1e-7) * (1.0 + xj.abs());
            if *xj < l - slack || *xj > u + slack {
                return Err(LpError::NumericalFailure(format!("variable {j} violates its bounds")));
            }
            *xj = xj.clamp(l, u);
        }
        for (i, row) in prob.rows.iter().enumerate() {
            let lhs: f64 = row.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum();
            let scale = 1e-7 * (1.0 + row.rhs.abs() + row.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs())));
            let ok = match row.relation {
                Relation::Le => lhs <= row.rhs + scale,
                Relation::Ge => lhs >= row.rhs - scale,
                Relation::Eq => (lhs - row.rhs).abs() <= scale,
            };
            if !ok {
                return Err(LpError::NumericalFailure(format!("row {i} violated at the reported optimum")));
            }
        }

        // Dual certificate recomputed from the original columns.
        let y = self.duals();
        let mut dual_obj: f64 = self.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        for j in 0..nc {
            let col_dot: f64 = (0..nr).map(|i| self.a[i * nc + j] * y[i]).sum();
            let dj = self.cost[j] - col_dot;
            let tol = 1e-7 * (1.0 + self.cost[j].abs());
            let sign_ok = match self.status[j] {
                Status::Basic(_) => dj.abs() <= tol,
                _ if self.lower[j] == self.upper[j] => true,
                Status::AtLower => dj >= -tol,
                Status::AtUpper => dj <= tol,
                Status::Free => dj.abs() <= tol,
            };
            if !sign_ok {
                return Err(LpError::NumericalFailure(format!("dual infeasible reduced cost {dj:e} on column {j}")));
            }
            if self.x[j] != 0.0 {
                dual_obj += dj * self.x[j];
            }
        }
        let objective: f64 = prob.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if (objective - dual_obj).abs() > opts.duality_tol {
            return Err(LpError::NumericalFailure(format!(
                "duality gap {:e} exceeds {:e}",
                (objective - dual_obj).abs(),
                opts.duality_tol
            )));
        }
        Ok(LpOutcome {
            status: LpStatus::Optimal,
            x,
            objective,
            duals: y,
            dual_objective: dual_obj,
            ray: None,
            iterations: self.iterations,
        })
    }
}
