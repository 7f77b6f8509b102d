//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsecover::bench::{run_bench, Method};
use sparsecover::bnc::{solve_branch_and_cut, BncConfig};
use sparsecover::brute::{brute_force_solve, FeasibilityTable};
use sparsecover::covering::{solve_two_stage, TwoStageConfig};
use sparsecover::cuts::{family_cut, forbidden_support_cut};
use sparsecover::generate::{generate_instance, DictionaryKind, GenConfig};
use sparsecover::heuristic::{initial_solution, vns_solve, VnsConfig};
use sparsecover::lp::{min_residual, residual_lp, simplex_solve, LpProblem, LpStatus, Relation, SupportOracle};
use sparsecover::{Instance, Norm, Solution, Support, Tolerances};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Case {
    name: String,
    inst: Instance,
    table: FeasibilityTable,
    brute: Solution,
    cover: Solution,
    bnc: Solution,
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn threshold(inst: &Instance) -> f64 {
    inst.alpha() + tol().feas_tol
}

fn criterion_configs() -> Vec<(String, GenConfig)> {
    (0..60)
        .map(|i: usize| {
            let kind = if i.is_multiple_of(2) { DictionaryKind::Gaussian } else { DictionaryKind::Correlated };
            let norm = if (i / 2).is_multiple_of(2) { Norm::L1 } else { Norm::LInf };
            let n = 2 + (i * 7) % 4;
            let m = 4 + (i * 5) % 9;
            let k = (1 + (i * 11) % 3).min(m);
            let mut cfg = GenConfig::new(kind, n, m, k, norm, 20_000 + i as u64);
            cfg.noise = if (i / 4).is_multiple_of(2) { 0.0 } else { 0.05 };
            let name = format!("c{i:02}-{kind}-n{n}-m{m}-k{k}-p{norm}-noise{}", cfg.noise);
            (name, cfg)
        })
        .collect()
}

fn build_cases() -> Result<Vec<Case>, String> {
    criterion_configs()
        .into_iter()
        .map(|(name, cfg)| {
            let inst = generate_instance(&cfg).map_err(|e| format!("{name}: {e}"))?.instance;
            let fail = |what: &str, e: sparsecover::Error| format!("{name}: {what} failed: {e}");
            let table = FeasibilityTable::enumerate(&inst, &tol()).map_err(|e| fail("enumeration", e))?;
            let brute = brute_force_solve(&inst, &tol()).map_err(|e| fail("brute", e))?;
            let cover = solve_two_stage(&inst, &TwoStageConfig::default()).map_err(|e| fail("cover", e))?;
            let bnc = solve_branch_and_cut(&inst, &BncConfig::default()).map_err(|e| fail("bnc", e))?;
            Ok(Case { name, inst, table, brute, cover, bnc })
        })
        .collect()
}

fn c1_exactness(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    for c in cases {
        let opt = c.table.optimum();
        let objs = [c.brute.objective, c.cover.objective, c.bnc.objective];
        if objs.iter().any(|&o| Some(o) != opt) {
            bad.push(format!("{}: oracle {:?}, brute/cover/bnc {:?}", c.name, opt, objs));
        }
        for (method, sol) in [("brute", &c.brute), ("cover", &c.cover), ("bnc", &c.bnc)] {
            if !sol.is_feasible(&c.inst, &tol()) {
                bad.push(format!("{}: {method} returned residual {} > α", c.name, sol.residual));
            }
        }
    }
    let dist: Vec<usize> = cases.iter().map(|c| c.brute.objective).collect();
    verdict(bad, format!("{} instances, objectives {:?}", cases.len(), dist))
}

fn c2_equivalence() -> Outcome {
    let mut bad = Vec::new();
    let mut masks = 0u64;
    for i in 0..20usize {
        let kind = if i % 3 == 0 { DictionaryKind::Correlated } else { DictionaryKind::Gaussian };
        let norm = if i % 2 == 0 { Norm::L1 } else { Norm::LInf };
        let m = 4 + i % 7;
        let n = 2 + i % 3;
        let mut cfg = GenConfig::new(kind, n, m, 1 + i % 3, norm, 30_000 + i as u64);
        cfg.noise = if i % 4 < 2 { 0.0 } else { 0.1 };
        let inst = generate_instance(&cfg).map_err(|e| e.to_string())?.instance;
        let table = FeasibilityTable::enumerate(&inst, &tol()).map_err(|e| e.to_string())?;
        let cuts: Vec<_> = table
            .forbidden_masks()
            .map(|f| forbidden_support_cut(&Support::from_mask(f, m), m))
            .collect();
        for mask in table.masks() {
            masks += 1;
            let satisfies = cuts.iter().all(|c| c.is_satisfied_by_mask(mask));
            if satisfies == table.is_forbidden(mask) {
                bad.push(format!("instance {i}, support {{{}}}", Support::from_mask(mask, m)));
            }
        }
    }
    verdict(bad, format!("20 instances, {masks} binary vectors compared"))
}

fn c3_cut_validity(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for c in cases {
        for (method, sol) in [("cover", &c.cover), ("bnc", &c.bnc)] {
            for cut in &sol.stats.cuts {
                count += 1;
                if !c.table.cut_is_valid(cut) {
                    bad.push(format!("{} ({method}): {cut}", c.name));
                }
            }
        }
    }
    verdict(bad, format!("{count} emitted cuts checked against full enumeration"))
}

fn c4_family_validity(cases: &[Case]) -> Outcome {
    let mut pools: Vec<(&Case, Vec<Support>)> = Vec::new();
    for c in cases.iter().filter(|c| c.inst.m() <= 10) {
        let vns = vns_solve(&c.inst, &VnsConfig::for_size(c.inst.m())).map_err(|e| e.to_string())?;
        let mut supports: Vec<Support> = [&c.cover, &c.bnc, &vns]
            .iter()
            .flat_map(|s| s.stats.maximal_supports.iter().cloned())
            .collect();
        supports.sort();
        supports.dedup();
        if supports.len() >= 2 {
            pools.push((c, supports));
        }
    }
    if pools.is_empty() {
        return Err("no run produced two distinct forbidden supports".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    for _ in 0..200 {
        let (case, supports) = &pools[rng.random_range(0..pools.len())];
        let size = rng.random_range(2..=4).min(supports.len());
        let family: Vec<Support> = sample(&mut rng, supports.len(), size)
            .into_iter()
            .map(|k| supports[k].clone())
            .collect();
        if let Some(s) = family.iter().find(|s| !case.table.is_forbidden(s.mask())) {
            bad.push(format!("{}: {{{s}}} is not forbidden", case.name));
            continue;
        }
        let cut = family_cut(&family, case.inst.m());
        if !case.table.cut_is_valid(&cut) {
            bad.push(format!("{}: {cut}", case.name));
        }
    }
    verdict(bad, format!("200 families drawn from {} instances", pools.len()))
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.random_range(1..=30);
    let rows = rng.random_range(1..=30);
    let mut cost = vec![0.0; n];
    let mut x0 = vec![0.0; n];
    let mut bounds = Vec::with_capacity(n);
    for j in 0..n {
        match rng.random_range(0..6) {
            // x ≥ 0 with a non-negative cost keeps the LP bounded.
            0 => {
                cost[j] = rng.random_range(0.0..1.0);
                x0[j] = rng.random_range(0.0..2.0);
                bounds.push((0.0, f64::INFINITY));
            }
            // Free with zero cost.
            1 => {
                x0[j] = rng.random_range(-2.0..2.0);
                bounds.push((f64::NEG_INFINITY, f64::INFINITY));
            }
            _ => {
                let lo: f64 = rng.random_range(-2.0..1.0);
                let hi = lo + rng.random_range(0.0..3.0);
                cost[j] = rng.random_range(-1.0..1.0);
                x0[j] = rng.random_range(lo..=hi);
                bounds.push((lo, hi));
            }
        }
    }
    let mut lp = LpProblem::new(cost);
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        lp.set_bounds(j, lo, hi);
    }
    for _ in 0..rows {
        let coeffs: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { rng.random_range(-1.0..1.0) } else { 0.0 })
            .collect();
        let at: f64 = coeffs.iter().zip(&x0).map(|(a, v)| a * v).sum();
        let (relation, rhs) = match rng.random_range(0..3) {
            0 => (Relation::Le, at + rng.random_range(0.0..1.0)),
            1 => (Relation::Ge, at - rng.random_range(0.0..1.0)),
            _ => (Relation::Eq, at),
        };
        lp.add_row(coeffs, relation, rhs);
    }
    lp
}

fn analytic_lp_cases() -> Vec<String> {
    let mut bad = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            bad.push(what.to_string());
        }
    };

    let mut lp = LpProblem::new(vec![1.0]);
    lp.set_free(0);
    lp.add_row(vec![1.0], Relation::Ge, 3.0);
    let out = simplex_solve(&lp).unwrap();
    check(
        out.status == LpStatus::Optimal && (out.objective - 3.0).abs() <= 1e-9 && (out.x[0] - 3.0).abs() <= 1e-9,
        "min x s.t. x ≥ 3",
    );

    let mut lp = LpProblem::new(vec![0.0]);
    lp.set_free(0);
    lp.add_row(vec![1.0], Relation::Le, 1.0);
    lp.add_row(vec![1.0], Relation::Ge, 2.0);
    check(simplex_solve(&lp).unwrap().status == LpStatus::Infeasible, "x ≤ 1, x ≥ 2");

    let lp = LpProblem::new(vec![-1.0]);
    check(simplex_solve(&lp).unwrap().status == LpStatus::Unbounded, "min −x, x ≥ 0");

    let three = |norm| {
        Instance::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]], vec![1.0, 1.0], norm, 0.25).unwrap()
    };
    let inf = three(Norm::LInf);
    let fit = min_residual(&inf, &Support::from_one_based(&[3])).unwrap();
    check(
        fit.residual.abs() <= 1e-9 && (fit.coefficients[0] - 1.0).abs() <= 1e-9,
        "ℓ∞ residual of {3} is 0 with x3 = 1",
    );
    let r = min_residual(&inf, &Support::from_one_based(&[1])).unwrap().residual;
    check((r - 1.0).abs() <= 1e-9, "ℓ∞ residual of {1} is 1");
    let r = min_residual(&three(Norm::L1), &Support::from_one_based(&[1])).unwrap().residual;
    check((r - 1.0).abs() <= 1e-9, "ℓ1 residual of {1} is 1");
    let r = min_residual(&inf, &Support::from_one_based(&[1, 2])).unwrap().residual;
    check(r.abs() <= 1e-9, "ℓ∞ residual of {1, 2} is 0");
    for norm in [Norm::L1, Norm::LInf] {
        let inst = three(norm);
        check(
            min_residual(&inst, &Support::empty()).unwrap().residual == inst.y_norm(),
            "empty-support residual equals ‖y‖",
        );
    }
    bad
}

fn c5_lp_certification(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let lp = random_lp(&mut rng);
        match simplex_solve(&lp) {
            Ok(out) if out.status == LpStatus::Optimal => match common::certifies_optimum(&lp, &out, 1e-7) {
                Ok(gap) => {
                    worst = worst.max(gap).max(out.duality_gap());
                    if out.duality_gap() > 1e-7 {
                        bad.push(format!("random LP {k}: reported gap {}", out.duality_gap()));
                    }
                }
                Err(e) => bad.push(format!("random LP {k}: {e}")),
            },
            Ok(out) => bad.push(format!("random LP {k}: feasible by construction but {:?}", out.status)),
            Err(e) => bad.push(format!("random LP {k}: {e}")),
        }
    }

    let mut residual_calls = 0u64;
    for c in cases {
        for mask in c.table.masks() {
            let s = Support::from_mask(mask, c.inst.m());
            residual_calls += 1;
            match min_residual(&c.inst, &s) {
                Ok(fit) => {
                    worst = worst.max(fit.duality_gap());
                    if fit.duality_gap() > 1e-7 {
                        bad.push(format!("{}: {{{s}}} gap {}", c.name, fit.duality_gap()));
                    }
                }
                Err(e) => bad.push(format!("{}: {{{s}}}: {e}", c.name)),
            }
            if !s.is_empty() {
                let lp = residual_lp(&c.inst, &s);
                match simplex_solve(&lp) {
                    Ok(out) => {
                        if let Err(e) = common::certifies_optimum(&lp, &out, 1e-7) {
                            bad.push(format!("{}: {{{s}}}: {e}", c.name));
                        }
                    }
                    Err(e) => bad.push(format!("{}: {{{s}}}: {e}", c.name)),
                }
            }
        }
    }
    bad.extend(analytic_lp_cases());
    verdict(
        bad,
        format!("200 random LPs and {residual_calls} residual LPs certified, worst gap {worst:.2e}; analytic cases exact"),
    )
}

fn c6_monotonicity(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let c = &cases[rng.random_range(0..cases.len())];
        let m = c.inst.m();
        let small = Support::from_indicator(&(0..m).map(|_| rng.random_bool(0.4)).collect::<Vec<_>>());
        let large = Support::new(
            small
                .indices()
                .iter()
                .copied()
                .chain((0..m).filter(|_| rng.random_bool(0.4)))
                .collect(),
        );
        let rs = min_residual(&c.inst, &small).map_err(|e| e.to_string())?.residual;
        let rl = min_residual(&c.inst, &large).map_err(|e| e.to_string())?.residual;
        if rl > rs + 1e-9 {
            bad.push(format!("{}: r({{{large}}}) = {rl} > r({{{small}}}) = {rs}", c.name));
        }
    }
    let mut checked = 0;
    for c in cases.iter().filter(|c| c.inst.m() <= 10) {
        checked += 1;
        for mask in c.table.forbidden_masks() {
            for j in 0..c.inst.m() {
                if mask >> j & 1 == 1 && !c.table.is_forbidden(mask & !(1 << j)) {
                    bad.push(format!("{}: down-closure broken at mask {mask:b}", c.name));
                }
            }
        }
    }
    verdict(bad, format!("500 nested pairs; down-closure on {checked} full enumerations"))
}

fn c7_maximal_extension(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    let mut count = 0;
    for c in cases {
        let limit = threshold(&c.inst);
        for (method, sol) in [("cover", &c.cover), ("bnc", &c.bnc)] {
            for j in &sol.stats.maximal_supports {
                count += 1;
                let r = min_residual(&c.inst, j).map_err(|e| e.to_string())?.residual;
                if r <= limit {
                    bad.push(format!("{} ({method}): {{{j}}} not forbidden (residual {r})", c.name));
                }
                for k in j.complement(c.inst.m()) {
                    let r = min_residual(&c.inst, &j.with(k)).map_err(|e| e.to_string())?.residual;
                    if r > limit {
                        bad.push(format!("{} ({method}): {{{j}}} + {} still forbidden", c.name, k + 1));
                    }
                }
            }
        }
    }
    verdict(bad, format!("{count} extended supports re-certified"))
}

fn c8_vns_sandwich(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    let mut gaps = 0;
    for c in cases {
        let opt = c.brute.objective;
        let greedy = initial_solution(&SupportOracle::new(&c.inst, tol())).map_err(|e| e.to_string())?.len();
        match vns_solve(&c.inst, &VnsConfig::for_size(c.inst.m())) {
            Ok(sol) => {
                if !sol.is_feasible(&c.inst, &tol()) {
                    bad.push(format!("{}: infeasible VNS answer", c.name));
                }
                if sol.stats.initial_objective != Some(greedy) {
                    bad.push(format!("{}: VNS started from {:?}, greedy gives {greedy}", c.name, sol.stats.initial_objective));
                }
                if !(opt <= sol.objective && sol.objective <= greedy) {
                    bad.push(format!("{}: {} outside [{opt}, {greedy}]", c.name, sol.objective));
                }
                gaps += usize::from(sol.objective > opt);
            }
            Err(e) => bad.push(format!("{}: {e}", c.name)),
        }
        match vns_solve(&c.inst, &VnsConfig::exhaustive(c.inst.m())) {
            Ok(sol) if sol.objective == opt => {}
            Ok(sol) => bad.push(format!("{}: exhaustive VNS {} vs optimum {opt}", c.name, sol.objective)),
            Err(e) => bad.push(format!("{}: exhaustive VNS: {e}", c.name)),
        }
    }
    verdict(bad, format!("{} instances; default VNS above optimum on {gaps}", cases.len()))
}

fn c9_big_m_guard(cases: &[Case]) -> Outcome {
    let mut bad = Vec::new();
    let mut incumbents = 0;
    for c in cases {
        for r in &c.bnc.stats.incumbents {
            incumbents += 1;
            if r.max_abs_x > 0.99 * r.big_m {
                bad.push(format!("{}: |x| = {} with M = {}", c.name, r.max_abs_x, r.big_m));
            }
        }
    }

    // Planted x* = (0, 0, 4) and (3, 4); M starts at half of ‖x*‖∞.
    let crafted = [
        Instance::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]], vec![4.0, 4.0], Norm::LInf, 0.0).unwrap(),
        Instance::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![3.0, 4.0], Norm::L1, 0.0).unwrap(),
    ];
    for (k, inst) in crafted.iter().enumerate() {
        let oracle = brute_force_solve(inst, &tol()).map_err(|e| e.to_string())?.objective;
        let cfg = BncConfig { big_m: Some(2.0), ..BncConfig::default() };
        match solve_branch_and_cut(inst, &cfg) {
            Ok(sol) => {
                if sol.objective != oracle {
                    bad.push(format!("crafted {k}: objective {} vs oracle {oracle}", sol.objective));
                }
                if sol.stats.warnings.is_empty() || sol.stats.big_m.is_none_or(|m| m <= 2.0) {
                    bad.push(format!("crafted {k}: M was never doubled"));
                }
                for r in &sol.stats.incumbents {
                    if r.max_abs_x > 0.99 * r.big_m {
                        bad.push(format!("crafted {k}: incumbent |x| = {} with M = {}", r.max_abs_x, r.big_m));
                    }
                }
            }
            Err(e) => bad.push(format!("crafted {k}: {e}")),
        }
    }
    verdict(bad, format!("{incumbents} incumbents within 0.99·M; undersized-M cases recovered"))
}

fn c10_determinism(cases: &[Case]) -> Outcome {
    let instances: Vec<(String, Instance)> = criterion_configs()
        .into_iter()
        .map(|(name, cfg)| (name, generate_instance(&cfg).unwrap().instance))
        .collect();
    let methods = [Method::Brute, Method::Cover, Method::Bnc];
    let run = || -> Result<Vec<String>, String> {
        let report = run_bench(&instances, &methods, &tol()).map_err(|e| e.to_string())?;
        Ok(report.records.iter().map(|r| r.to_json_without_timing()).collect())
    };
    let first = run()?;
    let second = run()?;
    let mut bad: Vec<String> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a != b)
        .map(|(a, b)| format!("{a} != {b}"))
        .collect();
    for (c, (name, inst)) in cases.iter().zip(&instances) {
        if c.inst != *inst {
            bad.push(format!("{name}: regenerated instance differs"));
        }
    }
    verdict(bad, format!("{} records identical across two runs", first.len()))
}

fn verdict(bad: Vec<String>, summary: String) -> Outcome {
    if bad.is_empty() {
        Ok(summary)
    } else {
        let shown: Vec<&String> = bad.iter().take(5).collect();
        Err(format!("{} failures, e.g. {:?}", bad.len(), shown))
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cases = match build_cases() {
        Ok(c) => c,
        Err(e) => {
            println!("FAIL criterion 1: {e}");
            println!("acceptance: criteria 3-10 not run");
            return ExitCode::FAILURE;
        }
    };
    let criteria: Vec<Criterion<'_>> = vec![
        ("cross-method exactness", Box::new(|| c1_exactness(&cases))),
        ("forbidden-support cuts describe feasible supports", Box::new(c2_equivalence)),
        ("emitted cuts are valid", Box::new(|| c3_cut_validity(&cases))),
        ("family cuts are valid", Box::new(|| c4_family_validity(&cases))),
        ("LP certification", Box::new(|| c5_lp_certification(&cases))),
        ("residual monotonicity and down-closure", Box::new(|| c6_monotonicity(&cases))),
        ("maximal extension", Box::new(|| c7_maximal_extension(&cases))),
        ("VNS sandwich", Box::new(|| c8_vns_sandwich(&cases))),
        ("big-M guard", Box::new(|| c9_big_m_guard(&cases))),
        ("determinism", Box::new(|| c10_determinism(&cases))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
