//! Oracles shared by the integration suites. None of them call into the
//! simplex engine.

#![allow(dead_code)]

use sparsecover::lp::{LpOutcome, LpProblem, Relation};

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when `a` is (numerically) singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(r);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= f * src;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn row_satisfied(coeffs: &[f64], relation: Relation, rhs: f64, x: &[f64], tol: f64) -> bool {
    let lhs: f64 = coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
    let scale = 1.0 + rhs.abs();
    match relation {
        Relation::Le => lhs <= rhs + tol * scale,
        Relation::Ge => lhs >= rhs - tol * scale,
        Relation::Eq => (lhs - rhs).abs() <= tol * scale,
    }
}

pub fn primal_feasible(lp: &LpProblem, x: &[f64], tol: f64) -> bool {
    (0..lp.num_vars()).all(|j| {
        let (lo, hi) = lp.bounds(j);
        x[j] >= lo - tol && x[j] <= hi + tol
    }) && lp.rows().iter().all(|r| row_satisfied(&r.coeffs, r.relation, r.rhs, x, tol))
}

/// Optimal value of a box-bounded LP by enumerating every vertex: each
/// choice of `n` tight constraints among rows and bounds. `None` when no
/// vertex is feasible, i.e. the LP is infeasible.
pub fn vertex_enumeration(lp: &LpProblem) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows().iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for j in 0..n {
        let (lo, hi) = lp.bounds(j);
        assert!(lo.is_finite() && hi.is_finite(), "vertex enumeration needs a box");
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let mut best: Option<f64> = None;
    for combo in combinations(planes.len(), n) {
        let a = combo.iter().map(|&k| planes[k].0.clone()).collect();
        let b = combo.iter().map(|&k| planes[k].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if primal_feasible(lp, &x, 1e-9) {
            let obj: f64 = lp.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Dual objective implied by the reported row multipliers, recomputed from
/// scratch: `b·y` plus, for each variable, its reduced cost times the bound
/// it would sit at. `None` when a multiplier has the wrong sign or a reduced
/// cost points toward an infinite bound (the multipliers certify nothing).
pub fn certified_dual_objective(lp: &LpProblem, duals: &[f64], tol: f64) -> Option<f64> {
    let mut reduced = lp.objective().to_vec();
    let mut value = 0.0;
    for (row, &y) in lp.rows().iter().zip(duals) {
        let sign_ok = match row.relation {
            Relation::Le => y <= tol,
            Relation::Ge => y >= -tol,
            Relation::Eq => true,
        };
        if !sign_ok {
            return None;
        }
        value += row.rhs * y;
        for (d, a) in reduced.iter_mut().zip(&row.coeffs) {
            *d -= a * y;
        }
    }
    for (j, &d) in reduced.iter().enumerate() {
        let (lo, hi) = lp.bounds(j);
        if d > tol {
            if !lo.is_finite() {
                return None;
            }
            value += d * lo;
        } else if d < -tol {
            if !hi.is_finite() {
                return None;
            }
            value += d * hi;
        } else if lo.is_finite() || hi.is_finite() {
            // Near-zero reduced cost: charge it at whichever finite bound is
            // cheaper, which keeps the value a valid lower bound.
            let at = |b: f64| if b.is_finite() { d * b } else { f64::INFINITY };
            value += at(lo).min(at(hi));
        }
    }
    Some(value)
}

/// Primal feasibility plus an independently recomputed dual bound matching
/// the primal objective within `gap_tol`.
pub fn certifies_optimum(lp: &LpProblem, out: &LpOutcome, gap_tol: f64) -> Result<f64, String> {
    if !primal_feasible(lp, &out.x, 1e-7) {
        return Err("reported point is not primal feasible".into());
    }
    let primal: f64 = lp.objective().iter().zip(&out.x).map(|(c, v)| c * v).sum();
    let dual = certified_dual_objective(lp, &out.duals, 1e-9).ok_or("multipliers are not dual feasible")?;
    let gap = (primal - dual).abs();
    if gap > gap_tol {
        return Err(format!("primal {primal} vs recomputed dual {dual}"));
    }
    Ok(gap)
}
