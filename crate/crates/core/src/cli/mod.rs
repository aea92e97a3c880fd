//! Command-line front end.
//!
//! Exit codes: 0 certified global minimum (or consistent oracle check),
//! 2 points found but none certified (or no feasible grid point),
//! 3 no critical point found, 64 usage, 65 bad problem data, 70 internal
//! failure or contradicted certificate.

pub mod problem_file;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::auglag::{self, AugLagConfig};
use crate::model::{eval_constraint, eval_objective, Problem};
use crate::oracle::{self, GridSpec};
use crate::solver::{self, Classification, SolverConfig};
use crate::Error;
use problem_file::ProblemFile;
use report::{OuterLoopReport, RunReport, SubproblemReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNCERTIFIED: i32 = 2;
pub const EXIT_NONE_FOUND: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

/// Result of one command: exit code and captured output streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "canondual",
    version,
    about = "Canonical dual solver for quadratic-operator problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate and classify critical points of the canonical dual.
    Solve(SolveArgs),
    /// Augmented Lagrangian sub-problem table or multiplier iteration.
    Auglag(AuglagArgs),
    /// Sample a one-dimensional curve as CSV.
    Curve(CurveArgs),
    /// Brute-force grid minimum and certificate cross-check.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct SeedArgs {
    /// Seed box for x: one `LO:HI` for every axis or a comma list per axis.
    #[arg(
        long = "seed-box",
        default_value = "-10:10",
        allow_hyphen_values = true
    )]
    seed_box: String,
    /// Seed interval for equality multipliers.
    #[arg(long = "mu-box", default_value = "-2:2", allow_hyphen_values = true)]
    mu_box: String,
    /// Seed interval for active inequality multipliers.
    #[arg(long = "lambda-box", default_value = "0:2", allow_hyphen_values = true)]
    lambda_box: String,
    /// Seeds per axis.
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// Newton residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
}

impl SeedArgs {
    fn config(&self) -> Result<SolverConfig, String> {
        let mu_box = parse_interval(&self.mu_box)?;
        let lambda_box = parse_interval(&self.lambda_box)?;
        Ok(SolverConfig {
            x_box: parse_box(&self.seed_box)?,
            mu_box,
            lambda_box,
            grid_density: self.grid,
            newton_max_iter: self.max_iter,
            newton_tol: self.tol,
            ..SolverConfig::default()
        })
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Print the full-precision JSON report.
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Print the fixed-width table (default).
    #[arg(long)]
    table: bool,
}

#[derive(Debug, Args)]
struct AuglagArgs {
    file: PathBuf,
    /// Initial multipliers, comma separated (default all zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu0: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    nu0: f64,
    /// Penalty schedule factor.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Maximum outer iterations.
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long = "feas-tol", default_value_t = 1e-8)]
    feas_tol: f64,
    /// Print the critical points of the first sub-problem instead of iterating.
    #[arg(long)]
    subtable: bool,
    #[command(flatten)]
    seeds: SeedArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CurveArgs {
    file: PathBuf,
    /// `objective`, `constraint:J`, `lagrangian` or `auglag`.
    #[arg(long, default_value = "objective")]
    function: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value = "-10:10", allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 1001)]
    samples: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    file: PathBuf,
    /// Grid box: one `LO:HI` for every axis or a comma list per axis.
    #[arg(long = "box", default_value = "-10:10", allow_hyphen_values = true)]
    bounds: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 2001)]
    density: usize,
    /// Feasibility band for constraint violations.
    #[arg(long = "feas-tol", default_value_t = 0.05)]
    feas_tol: f64,
    /// JSON report from `solve --json` to cross-validate.
    #[arg(long)]
    against: Option<PathBuf>,
    /// Allowed shortfall of a grid value below a certified minimum.
    #[arg(long, default_value_t = 0.02)]
    budget: f64,
    /// Lift the dimension cap of three.
    #[arg(long)]
    allow_large_n: bool,
}

/// Parses `LO:HI`.
pub fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("interval `{s}` is not of the form LO:HI"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("interval `{s}`: `{t}` is not a number"))
    };
    let (lo, hi) = (num(lo)?, num(hi)?);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("interval `{s}` must be finite with LO <= HI"));
    }
    Ok((lo, hi))
}

/// Comma-separated list of intervals.
pub fn parse_box(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',').map(parse_interval).collect()
}

fn expand_box(b: Vec<(f64, f64)>, n: usize) -> Result<Vec<(f64, f64)>, String> {
    match b.len() {
        1 => Ok(vec![b[0]; n]),
        k if k == n => Ok(b),
        k => Err(format!(
            "box has {k} intervals for a problem of dimension {n}"
        )),
    }
}

/// Exit code of an error raised while running a pipeline on a loaded problem.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoFeasiblePoint { .. } => EXIT_UNCERTIFIED,
        Error::NoConvergence(_) => EXIT_NONE_FOUND,
        Error::InvalidParameter(_)
        | Error::GridTooLarge { .. }
        | Error::DimensionMismatch { .. } => EXIT_USAGE,
        Error::Unsupported(_)
        | Error::Domain { .. }
        | Error::NotSymmetric { .. }
        | Error::ActiveSetExplosion { .. } => EXIT_DATA,
        Error::SingularG { .. } | Error::CertificationContradicted(_) => EXIT_INTERNAL,
    }
}

fn pipeline_failure(e: Error) -> Outcome {
    let code = exit_code(&e);
    let label = match e {
        Error::NoConvergence(_) => "no critical point found",
        Error::CertificationContradicted(_) => "certification contradicted",
        _ => "error",
    };
    Outcome::fail(code, format!("{label}: {e}"))
}

fn load(path: &Path) -> Result<(ProblemFile, Problem), Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::fail(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    let file = ProblemFile::parse(&text)
        .map_err(|e| Outcome::fail(EXIT_DATA, format!("{}: {e}", path.display())))?;
    let problem = file
        .to_problem()
        .map_err(|e| Outcome::fail(EXIT_DATA, format!("{}: {e}", path.display())))?;
    Ok((file, problem))
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_solve(args: SolveArgs) -> Result<Outcome, Outcome> {
    let (file, problem) = load(&args.file)?;
    let cfg = args
        .seeds
        .config()
        .map_err(|e| Outcome::fail(EXIT_USAGE, e))?;
    let start = Instant::now();
    let points = solver::solve_critical_points(&problem, &cfg).map_err(pipeline_failure)?;
    let report = RunReport::new(file, cfg, points, elapsed_ms(start));
    let code = if report.global.is_some() {
        EXIT_OK
    } else {
        EXIT_UNCERTIFIED
    };
    let stdout = if args.json {
        to_json(&report)
    } else {
        report.render_table()
    };
    Ok(Outcome::ok(code, stdout))
}

fn cmd_auglag(args: AuglagArgs) -> Result<Outcome, Outcome> {
    let (file, problem) = load(&args.file)?;
    let scfg = args
        .seeds
        .config()
        .map_err(|e| Outcome::fail(EXIT_USAGE, e))?;
    let mu0 = if args.mu0.is_empty() {
        vec![0.0; problem.p()]
    } else {
        args.mu0
    };
    let cfg = AugLagConfig {
        nu0: args.nu0,
        alpha: args.alpha,
        mu0,
        max_outer_iter: args.iters,
        feasibility_tol: args.feas_tol,
    };
    if problem.p() == 0 {
        return Err(Outcome::fail(
            EXIT_DATA,
            "problem has no equality constraint",
        ));
    }
    cfg.validate(problem.p())
        .map_err(|e| Outcome::fail(EXIT_USAGE, e.to_string()))?;
    let start = Instant::now();
    if args.subtable {
        let points = auglag::solve_subproblem_dual(&problem, &cfg.mu0, cfg.nu0, &scfg)
            .map_err(pipeline_failure)?;
        let certified = points
            .iter()
            .any(|q| q.classification == Classification::GlobalMinCertified);
        let mut caveats = vec![report::CAVEAT_CONVEXITY.to_string()];
        if points
            .iter()
            .any(|q| q.classification == Classification::BiggestLocalMaxCertified)
        {
            caveats.push(report::CAVEAT_MAX_LABEL.to_string());
        }
        let rep = SubproblemReport {
            problem: file,
            config: scfg,
            mu_k: cfg.mu0,
            nu: cfg.nu0,
            points,
            caveats,
            timing_ms: elapsed_ms(start),
        };
        let stdout = if args.json {
            to_json(&rep)
        } else {
            rep.render_table()
        };
        return Ok(Outcome::ok(
            if certified { EXIT_OK } else { EXIT_UNCERTIFIED },
            stdout,
        ));
    }
    let history = auglag::outer_loop(&problem, &cfg, &scfg).map_err(pipeline_failure)?;
    let last = history
        .last()
        .ok_or_else(|| Outcome::fail(EXIT_USAGE, "iters must be positive"))?;
    let converged = last.h_inf <= cfg.feasibility_tol;
    let code = if converged && last.certified {
        EXIT_OK
    } else {
        EXIT_UNCERTIFIED
    };
    let rep = OuterLoopReport {
        problem: file,
        config: scfg,
        auglag: cfg,
        history,
        converged,
        timing_ms: elapsed_ms(start),
    };
    let stdout = if args.json {
        to_json(&rep)
    } else {
        rep.render_table()
    };
    Ok(Outcome::ok(code, stdout))
}

/// Scalar function selected by `--function`.
enum CurveFunction {
    Objective,
    Constraint(usize),
    Lagrangian,
    Auglag,
}

fn parse_function(s: &str, p: &Problem) -> Result<CurveFunction, String> {
    match s {
        "objective" => Ok(CurveFunction::Objective),
        "lagrangian" => Ok(CurveFunction::Lagrangian),
        "auglag" => Ok(CurveFunction::Auglag),
        _ => {
            let j = s
                .strip_prefix("constraint:")
                .and_then(|j| j.parse::<usize>().ok())
                .ok_or_else(|| format!("unknown function `{s}`"))?;
            if j >= p.p() + p.m() {
                return Err(format!(
                    "constraint index {j} out of range ({} constraints)",
                    p.p() + p.m()
                ));
            }
            Ok(CurveFunction::Constraint(j))
        }
    }
}

fn or_zeros(v: Vec<f64>, len: usize, what: &str) -> Result<Vec<f64>, String> {
    if v.is_empty() {
        Ok(vec![0.0; len])
    } else if v.len() == len {
        Ok(v)
    } else {
        Err(format!("--{what} needs {len} values, got {}", v.len()))
    }
}

/// `f(x) + μᵀh(x) + λᵀg(x)`.
fn lagrangian(p: &Problem, x: &[f64], mu: &[f64], lambda: &[f64]) -> crate::Result<f64> {
    let h = p.equality_values(x)?;
    let g = p.inequality_values(x)?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    Ok(eval_objective(p, x)? + dot(mu, &h) + dot(lambda, &g))
}

fn cmd_curve(args: CurveArgs) -> Result<Outcome, Outcome> {
    let (_, problem) = load(&args.file)?;
    if problem.n() != 1 {
        return Err(Outcome::fail(
            EXIT_DATA,
            format!(
                "curve sampling needs n = 1, problem has n = {}",
                problem.n()
            ),
        ));
    }
    let usage = |e: String| Outcome::fail(EXIT_USAGE, e);
    let function = parse_function(&args.function, &problem).map_err(usage)?;
    let (lo, hi) = parse_interval(&args.range).map_err(usage)?;
    if args.samples < 2 {
        return Err(usage("--samples must be at least 2".into()));
    }
    let mu = or_zeros(args.mu, problem.p(), "mu").map_err(usage)?;
    let lambda = or_zeros(args.lambda, problem.m(), "lambda").map_err(usage)?;
    if matches!(function, CurveFunction::Auglag) && !(args.nu > 0.0 && args.nu.is_finite()) {
        return Err(usage("--nu must be positive".into()));
    }

    let step = (hi - lo) / (args.samples - 1) as f64;
    let mut samples = Vec::with_capacity(args.samples);
    for i in 0..args.samples {
        let x = if i + 1 == args.samples {
            hi
        } else {
            lo + step * i as f64
        };
        let xs = [x];
        let value = match function {
            CurveFunction::Objective => eval_objective(&problem, &xs),
            CurveFunction::Constraint(j) if j < problem.p() => {
                eval_constraint(&problem.h_terms()[j], &xs)
            }
            CurveFunction::Constraint(j) => {
                eval_constraint(&problem.g_terms()[j - problem.p()], &xs)
            }
            CurveFunction::Lagrangian => lagrangian(&problem, &xs, &mu, &lambda),
            CurveFunction::Auglag => auglag::eval_auglag(&problem, &xs, &mu, args.nu),
        }
        .map_err(|e| Outcome::fail(exit_code(&e), format!("at x = {x}: {e}")))?;
        samples.push((x, value));
    }
    let csv = report::curve_csv(&samples);
    match args.out {
        Some(path) => {
            std::fs::write(&path, csv).map_err(|e| {
                Outcome::fail(
                    EXIT_INTERNAL,
                    format!("cannot write {}: {e}", path.display()),
                )
            })?;
            Ok(Outcome::ok(EXIT_OK, String::new()))
        }
        None => Ok(Outcome::ok(EXIT_OK, csv)),
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<Outcome, Outcome> {
    let (file, problem) = load(&args.file)?;
    let usage = |e: String| Outcome::fail(EXIT_USAGE, e);
    let bounds = parse_box(&args.bounds)
        .and_then(|b| expand_box(b, problem.n()))
        .map_err(usage)?;
    if !(args.feas_tol >= 0.0 && args.budget >= 0.0) {
        return Err(usage("--feas-tol and --budget must be non-negative".into()));
    }
    let gs = GridSpec {
        allow_large_n: args.allow_large_n,
        ..GridSpec::new(bounds, args.density, args.feas_tol)
    };
    let points = match &args.against {
        None => Vec::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let prior: RunReport = serde_json::from_str(&text)
                .map_err(|e| Outcome::fail(EXIT_DATA, format!("{}: {e}", path.display())))?;
            if prior.problem != file {
                return Err(Outcome::fail(
                    EXIT_DATA,
                    format!("{} was produced for a different problem", path.display()),
                ));
            }
            prior.points()
        }
    };
    let cv =
        oracle::cross_validate(&problem, &points, &gs, args.budget).map_err(pipeline_failure)?;
    let mut out = format!(
        "grid minimum: f = {} at x = {} ({} feasible of {} points, band {})\n",
        report::num4(cv.grid.f_best),
        report::vec4(&cv.grid.x_best),
        cv.grid.feas_count,
        cv.grid.evaluated,
        cv.grid.feas_tol
    );
    if args.against.is_some() {
        match cv.certified_min {
            Some(m) => out.push_str(&format!(
                "certified minimum: f = {}\ncertification consistent\n",
                report::num4(m)
            )),
            None => out.push_str("no certified global minimum to check\n"),
        }
    }
    Ok(Outcome::ok(EXIT_OK, out))
}

/// Parses `args` (program name first) and runs the selected command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::ok(EXIT_OK, text),
                _ => Outcome::fail(EXIT_USAGE, text),
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Auglag(a) => cmd_auglag(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    result.unwrap_or_else(|o| o)
}
