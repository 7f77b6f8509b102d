//! Enumeration oracles for small instances.

use itertools::Itertools;

use crate::covering::recover_x;
use crate::cuts::CoverInequality;
use crate::error::{Error, Result};
use crate::lp::SupportOracle;
use crate::model::{Instance, Solution, Support, Tolerances};

pub const ENUMERATION_LIMIT: usize = 24;

fn guard(m: usize) -> Result<()> {
    if m > ENUMERATION_LIMIT {
        return Err(Error::TooManyColumns { m, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Minimum-cardinality support by enumeration, lexicographically least
/// within the optimal cardinality.
pub fn brute_force_solve(inst: &Instance, tol: &Tolerances) -> Result<Solution> {
    guard(inst.m())?;
    let oracle = SupportOracle::new(inst, *tol);
    for size in 0..=inst.m() {
        for combo in (0..inst.m()).combinations(size) {
            let support = Support::new(combo);
            if !oracle.is_forbidden(&support)? {
                let mut sol = recover_x(inst, &support, tol)?;
                sol.stats.lp_calls += oracle.lp_calls();
                sol.stats.lower_bound = size;
                sol.stats.proven_optimal = true;
                sol.stats.nodes = oracle.lp_calls();
                return Ok(sol);
            }
        }
    }
    Err(Error::ProblemInfeasible)
}

/// Residual of every support, indexed by bitmask.
#[derive(Debug, Clone)]
pub struct FeasibilityTable {
    m: usize,
    residual: Vec<f64>,
    threshold: f64,
}

impl FeasibilityTable {
    pub fn enumerate(inst: &Instance, tol: &Tolerances) -> Result<Self> {
        guard(inst.m())?;
        let oracle = SupportOracle::new(inst, *tol);
        let count = 1usize << inst.m();
        let mut residual = Vec::with_capacity(count);
        for mask in 0..count as u64 {
            residual.push(oracle.fit(&Support::from_mask(mask, inst.m()))?.residual);
        }
        Ok(FeasibilityTable {
            m: inst.m(),
            residual,
            threshold: inst.alpha() + tol.feas_tol,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn residual(&self, mask: u64) -> f64 {
        self.residual[mask as usize]
    }

    pub fn is_forbidden(&self, mask: u64) -> bool {
        self.residual[mask as usize] > self.threshold
    }

    pub fn masks(&self) -> impl Iterator<Item = u64> {
        0..(1u64 << self.m)
    }

    pub fn feasible_masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.masks().filter(|&mask| !self.is_forbidden(mask))
    }

    pub fn forbidden_masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.masks().filter(|&mask| self.is_forbidden(mask))
    }

    /// Smallest feasible support size, if any support is feasible.
    pub fn optimum(&self) -> Option<usize> {
        self.feasible_masks().map(|mask| mask.count_ones() as usize).min()
    }

    /// True iff every feasible support's indicator satisfies the cut.
    pub fn cut_is_valid(&self, cut: &CoverInequality) -> bool {
        self.feasible_masks().all(|mask| cut.is_satisfied_by_mask(mask))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{diag34, three_column};
    use crate::model::Norm;

    #[test]
    fn three_column_optimum() {
        let sol = brute_force_solve(&three_column(Norm::LInf, 0.25), &Tolerances::default()).unwrap();
        assert_eq!(sol.objective, 1);
        assert_eq!(sol.support.one_based(), vec![3]);
    }

    #[test]
    fn loose_threshold_gives_empty_support() {
        let sol = brute_force_solve(&three_column(Norm::L1, 2.0), &Tolerances::default()).unwrap();
        assert_eq!(sol.objective, 0);
        assert!(sol.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diagonal_needs_both_columns() {
        let sol = brute_force_solve(&diag34(Norm::L1, 1.0), &Tolerances::default()).unwrap();
        assert_eq!(sol.support.one_based(), vec![1, 2]);
    }

    #[test]
    fn table_classifies_three_column() {
        let table = FeasibilityTable::enumerate(&three_column(Norm::LInf, 0.25), &Tolerances::default()).unwrap();
        let forbidden: Vec<u64> = table.forbidden_masks().collect();
        // ∅, {1}, {2}
        assert_eq!(forbidden, vec![0b000, 0b001, 0b010]);
        assert_eq!(table.optimum(), Some(1));
    }

    #[test]
    fn guard_rejects_large_dictionaries() {
        let m = 25;
        let inst = Instance::new(1, m, vec![1.0; m], vec![1.0], Norm::L1, 0.0).unwrap();
        assert!(matches!(
            brute_force_solve(&inst, &Tolerances::default()),
            Err(Error::TooManyColumns { m: 25, .. })
        ));
    }
}
