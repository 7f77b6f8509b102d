use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sparsecover::bench::{parse_methods, run_bench, Method};
use sparsecover::generate::{generate_instance, DictionaryKind, GenConfig};
use sparsecover::io::{read_instance, read_solution, write_instance, write_solution, write_support, ParseError};
use sparsecover::model::{residual_norm, support_of};
use sparsecover::{Error, Instance, Norm, Solution, Tolerances};

const EXIT_GENERIC: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 5;
const EXIT_DISAGREEMENT: u8 = 6;

#[derive(Parser)]
#[command(name = "sparsecover", version, about = "Sparsest x with ‖y − Hx‖ₚ ≤ α for p ∈ {1, inf}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Write a seeded random instance and its planted support.
    Gen(GenArgs),
    /// Run several methods over many instances and compare them.
    Bench(BenchArgs),
    /// Validate a claimed solution against an instance.
    Check(CheckArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[arg(long)]
    input: PathBuf,
    /// Override the threshold from the file.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the norm from the file (`1` or `inf`).
    #[arg(long)]
    p: Option<Norm>,
    /// Accepted for reproducible scripting; every method is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print one JSON object instead of text.
    #[arg(long)]
    json: bool,
    /// Also write the coefficients as a solution file.
    #[arg(long)]
    solution_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "gaussian", value_parser = parse_kind)]
    kind: DictionaryKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.1)]
    margin: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value = "1")]
    p: Norm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance file; the planted support goes to `<output>.planted`.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated list from brute, cover, bnc, vns.
    #[arg(long, default_value = "brute,cover,bnc,vns")]
    methods: String,
    /// Glob patterns selecting instance files.
    #[arg(long, num_args = 1.., required = true)]
    instances: Vec<String>,
    /// Leave the wall-clock field out of the JSON records.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    solution: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<DictionaryKind, String> {
    s.parse()
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ProblemInfeasible => EXIT_INFEASIBLE,
            Error::LimitReached { .. } => EXIT_LIMIT,
            Error::Disagreement(_) => EXIT_DISAGREEMENT,
            _ => EXIT_GENERIC,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure { code: EXIT_PARSE, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_GENERIC,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

/// Shortest round-trip text; integers without a trailing `.0`, and
/// magnitudes below 1e-12 as `0`.
fn fmt_real(v: f64) -> String {
    if v.abs() < 1e-12 {
        "0".to_string()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:?}")
    }
}

fn fmt_reals(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(" ")
}

fn load(path: &Path, alpha: Option<f64>, p: Option<Norm>) -> Result<Instance, Failure> {
    let mut inst = read_instance(path)?;
    if let Some(norm) = p {
        inst = inst.with_norm(norm);
    }
    if let Some(alpha) = alpha {
        inst = inst.with_alpha(alpha).map_err(|e| Failure { code: EXIT_PARSE, message: e.to_string() })?;
    }
    Ok(inst)
}

fn render_text(method: Method, sol: &Solution) -> String {
    let s = &sol.stats;
    let mut out = String::new();
    writeln!(out, "method {method}").unwrap();
    writeln!(out, "objective {}", sol.objective).unwrap();
    writeln!(out, "support {}", sol.support).unwrap();
    writeln!(out, "residual {}", fmt_real(sol.residual)).unwrap();
    writeln!(out, "x {}", fmt_reals(&sol.x)).unwrap();
    writeln!(out, "lower_bound {}", s.lower_bound).unwrap();
    writeln!(out, "proven_optimal {}", s.proven_optimal).unwrap();
    writeln!(out, "nodes {}", s.nodes).unwrap();
    writeln!(out, "iterations {}", s.iterations).unwrap();
    writeln!(out, "lp_calls {}", s.lp_calls).unwrap();
    writeln!(out, "cuts {}", s.cuts.len()).unwrap();
    if let Some(m) = s.big_m {
        writeln!(out, "big_m {}", fmt_real(m)).unwrap();
    }
    if let Some(k) = s.initial_objective {
        writeln!(out, "initial_objective {k}").unwrap();
    }
    out
}

fn render_json(method: Method, sol: &Solution) -> String {
    let s = &sol.stats;
    json!({
        "method": method,
        "objective": sol.objective,
        "support": sol.support.one_based(),
        "residual": sol.residual,
        "x": sol.x,
        "lower_bound": s.lower_bound,
        "proven_optimal": s.proven_optimal,
        "nodes": s.nodes,
        "iterations": s.iterations,
        "lp_calls": s.lp_calls,
        "cuts": s.cuts.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "big_m": s.big_m,
        "initial_objective": s.initial_objective,
        "warnings": s.warnings,
    })
    .to_string()
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let inst = load(&args.input, args.alpha, args.p)?;
    let tol = Tolerances::default();
    let sol = args.method.solve(&inst, &tol)?;
    for w in &sol.stats.warnings {
        eprintln!("warning: {w}");
    }
    if args.json {
        println!("{}", render_json(args.method, &sol));
    } else {
        print!("{}", render_text(args.method, &sol));
    }
    if let Some(path) = &args.solution_out {
        std::fs::write(path, write_solution(&sol.x)).map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let cfg = GenConfig {
        noise: args.noise,
        margin: args.margin,
        epsilon: args.epsilon,
        ..GenConfig::new(args.kind, args.n, args.m, args.k, args.p, args.seed)
    };
    let g = generate_instance(&cfg)?;
    std::fs::write(&args.output, write_instance(&g.instance)).map_err(|e| io_failure(&args.output, e))?;
    let mut sidecar = args.output.clone().into_os_string();
    sidecar.push(".planted");
    let sidecar = PathBuf::from(sidecar);
    std::fs::write(&sidecar, write_support(&g.planted)).map_err(|e| io_failure(&sidecar, e))?;
    eprintln!("wrote {} and {}", args.output.display(), sidecar.display());
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let methods = parse_methods(&args.methods).map_err(|message| Failure { code: EXIT_GENERIC, message })?;
    let mut paths = Vec::new();
    for pattern in &args.instances {
        let matches = glob::glob(pattern).map_err(|e| Failure {
            code: EXIT_GENERIC,
            message: format!("bad pattern `{pattern}`: {e}"),
        })?;
        for entry in matches {
            let path = entry.map_err(|e| Failure { code: EXIT_GENERIC, message: e.to_string() })?;
            if path.extension().is_none_or(|ext| ext != "planted") {
                paths.push(path);
            }
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        return Err(Failure {
            code: EXIT_GENERIC,
            message: "no instance files matched".into(),
        });
    }
    let instances = paths
        .iter()
        .map(|p| Ok((p.display().to_string(), read_instance(p)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let report = run_bench(&instances, &methods, &Tolerances::default())?;
    for r in &report.records {
        println!("{}", if args.no_timing { r.to_json_without_timing() } else { r.to_json() });
    }
    eprint!("{}", report.table());
    Ok(())
}

fn check(args: CheckArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.input)?;
    let x = read_solution(&args.solution)?;
    if x.len() != inst.m() {
        return Err(Failure {
            code: EXIT_PARSE,
            message: format!("solution has {} entries, instance has m = {}", x.len(), inst.m()),
        });
    }
    let tol = Tolerances::default();
    let residual = residual_norm(&inst, &x)?;
    let support = support_of(&x, &tol);
    let feasible = residual <= inst.alpha() + tol.feas_tol;
    println!("objective {}", support.len());
    println!("support {support}");
    println!("residual {}", fmt_real(residual));
    println!("feasible {feasible}");
    if !feasible {
        return Err(Failure {
            code: EXIT_CHECK_FAILED,
            message: format!("residual {residual} exceeds alpha {} + {}", inst.alpha(), tol.feas_tol),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => gen(a),
        Command::Bench(a) => bench(a),
        Command::Check(a) => check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
