//! Command-line front end.
//!
//! ```text
//! dirichlet check|solve|converge|norms --config <path> [--output <path>]
//!           [--seed <int>] [--n <int>] [--ns <comma list>] [--x-range <real>]
//! ```
//!
//! Exit status: 0 on success, 1 when a condition is violated, 2 when the
//! solver fails, 3 for usage, configuration and I/O errors.

pub mod config;
pub mod csv;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use config::{load_config, ConfigError, ProblemConfig};

use crate::convergence::{derivative_bound_check, run_study, Provenance, StudyError, StudyProblem};
use crate::grid::GridFunction;
use crate::problem::{
    apriori_bound, check_fx_lower, check_growth, classify, default_x_range, ConditionReport,
    ProblemError, Witness, DEFAULT_SAMPLES_T, DEFAULT_SAMPLES_X,
};
use crate::solver::{newton_solve, SolverError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_SOLVER_FAILURE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Random elements per grid size in the `norms` table.
pub const NORM_SAMPLES: usize = 1000;
/// Witness rows printed per violated condition.
const WITNESS_ROWS: usize = 20;

#[derive(Debug, Parser)]
#[command(
    name = "dirichlet",
    version,
    about = "Nonlinear Dirichlet difference equation solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the growth and f_x conditions and classify the problem
    Check(CommandArgs),
    /// Solve on one grid and write the solution as CSV
    Solve(CommandArgs),
    /// Run a grid-refinement study and write the convergence table as CSV
    Converge(CommandArgs),
    /// Tabulate the norm inequality chain on random grid functions
    Norms(CommandArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommandArgs {
    /// Problem config (`key = value` text, or JSON for `.json` files)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; defaults to stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Seed for random sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid size for `solve` (overrides the config's N)
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid sizes for `converge` and `norms` (overrides the config's Ns)
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Half-width of the x sampling box for `check`
    #[arg(long)]
    pub x_range: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Check,
    Solve,
    Converge,
    Norms,
}

/// Everything a command needs besides the config and output streams.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub n: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub x_range: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Study(
                StudyError::SolveFailed { .. } | StudyError::ReferenceFailed { .. },
            ) => EXIT_SOLVER_FAILURE,
            _ => EXIT_USAGE,
        }
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status. Diagnostics go to `log`.
pub fn main_from_args<I, T>(args: I, stdout: &mut dyn Write, log: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(log, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (kind, args) = match cli.command {
        Command::Check(a) => (CommandKind::Check, a),
        Command::Solve(a) => (CommandKind::Solve, a),
        Command::Converge(a) => (CommandKind::Converge, a),
        Command::Norms(a) => (CommandKind::Norms, a),
    };
    match execute(kind, &args, stdout, log) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(
    kind: CommandKind,
    args: &CommandArgs,
    stdout: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<i32, CliError> {
    let config = match &args.config {
        Some(path) => Some(load_config(path)?),
        None if kind == CommandKind::Norms => None,
        None => return Err(CliError::Usage("--config is required".into())),
    };
    let opts = RunOptions {
        seed: args.seed,
        n: args.n,
        ns: args.ns.clone(),
        x_range: args.x_range,
    };
    match &args.output {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            let code = run(kind, config.as_ref(), &opts, &mut file, log)?;
            file.flush()?;
            Ok(code)
        }
        None => run(kind, config.as_ref(), &opts, stdout, log),
    }
}

/// Runs one command. Primary output (report text or CSV) goes to `out`,
/// summaries and warnings to `log`.
pub fn run(
    kind: CommandKind,
    config: Option<&ProblemConfig>,
    opts: &RunOptions,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<i32, CliError> {
    let require = || config.ok_or_else(|| CliError::Usage("this command needs a config".into()));
    match kind {
        CommandKind::Check => run_check(require()?, opts, out),
        CommandKind::Solve => run_solve(require()?, opts, out, log),
        CommandKind::Converge => run_converge(require()?, opts, out, log),
        CommandKind::Norms => run_norms(config, opts, out, log),
    }
}

#[derive(Serialize)]
struct ReportSummary<'a> {
    condition: crate::problem::ConditionId,
    verdict: crate::problem::Verdict,
    samples_t: usize,
    samples_x: usize,
    x_range: f64,
    violations: usize,
    witnesses: &'a [Witness],
}

impl<'a> From<&'a ConditionReport> for ReportSummary<'a> {
    fn from(r: &'a ConditionReport) -> Self {
        Self {
            condition: r.condition,
            verdict: r.verdict,
            samples_t: r.samples_t,
            samples_x: r.samples_x,
            x_range: r.x_range,
            violations: r.witnesses.len(),
            witnesses: &r.witnesses[..r.witnesses.len().min(WITNESS_ROWS)],
        }
    }
}

#[derive(Serialize)]
struct CheckSummary<'a> {
    problem: &'a str,
    constants: crate::problem::Constants,
    classification: crate::problem::Classification,
    apriori_bound: Option<f64>,
    reports: Vec<ReportSummary<'a>>,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "applies"
    } else {
        "does not apply"
    }
}

fn run_check(
    config: &ProblemConfig,
    opts: &RunOptions,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let spec = config.spec()?;
    let c = spec.constants();
    let class = classify(&spec);
    let v_sup = spec
        .v_sup_on_grid(DEFAULT_SAMPLES_T - 1)
        .map_err(ProblemError::from)?;
    let bound = apriori_bound(&spec, v_sup).ok();
    let x_range = match opts.x_range {
        Some(r) => r,
        None => default_x_range(&spec)?,
    };
    let growth = check_growth(&spec, x_range, DEFAULT_SAMPLES_T, DEFAULT_SAMPLES_X)?;
    let fx = check_fx_lower(&spec, x_range, DEFAULT_SAMPLES_T, DEFAULT_SAMPLES_X)?;

    writeln!(out, "problem: {}", config.name)?;
    writeln!(out, "f(t,x) = {}", config.f)?;
    match (&config.v, &config.x_star) {
        (Some(v), _) => writeln!(out, "v(t) = {v}")?,
        (None, Some(x)) => writeln!(out, "v(t) = x*'' - f(t, x*) with x*(t) = {x}")?,
        (None, None) => {}
    }
    writeln!(out, "f_x(t,x) = {}", spec.fx())?;
    writeln!(
        out,
        "declared: A = {}, B = {}, fx_lower = {}",
        c.a, c.b, c.fx_lower
    )?;
    writeln!(
        out,
        "continuous theorem (A < pi^2, fx_lower > -pi^2): {}",
        yes_no(class.continuous_theorem_applies)
    )?;
    writeln!(
        out,
        "discrete theorem (A < 1, fx_lower > -1): {}",
        yes_no(class.discrete_theorem_applies)
    )?;
    match bound {
        Some(m) => writeln!(
            out,
            "a-priori bound M = (sup|v| + B)/(1 - A) = {m} (sup|v| = {v_sup})"
        )?,
        None => writeln!(out, "a-priori bound: undefined (A >= 1)")?,
    }
    for (label, report) in [
        ("|f(t,x)| <= A|x| + B", &growth),
        ("f_x(t,x) >= fx_lower", &fx),
    ] {
        write!(
            out,
            "{label} on [0,1] x [-{x_range}, {x_range}] ({} x {} samples): ",
            report.samples_t, report.samples_x
        )?;
        match report.worst() {
            None => writeln!(out, "no violation found")?,
            Some(w) => writeln!(
                out,
                "VIOLATED at {} sample(s); worst t = {}, x = {}, lhs = {}, rhs = {}",
                report.witnesses.len(),
                w.t,
                w.x,
                w.lhs,
                w.rhs
            )?,
        }
    }
    let violated = growth.violated() || fx.violated();
    if violated {
        writeln!(out, "witnesses:")?;
        writeln!(out, "condition,t,x,lhs,rhs")?;
        for (name, report) in [("growth", &growth), ("fx_lower", &fx)] {
            for w in report.witnesses.iter().take(WITNESS_ROWS) {
                writeln!(
                    out,
                    "{name},{},{},{},{}",
                    csv::real(w.t),
                    csv::real(w.x),
                    csv::real(w.lhs),
                    csv::real(w.rhs)
                )?;
            }
        }
    }
    let summary = CheckSummary {
        problem: &config.name,
        constants: c,
        classification: class,
        apriori_bound: bound,
        reports: vec![(&growth).into(), (&fx).into()],
    };
    writeln!(out, "--- json")?;
    writeln!(
        out,
        "{}",
        serde_json::to_string(&summary).map_err(io::Error::other)?
    )?;

    Ok(if violated || !class.discrete_theorem_applies {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

fn run_solve(
    config: &ProblemConfig,
    opts: &RunOptions,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<i32, CliError> {
    let n = opts
        .n
        .or(config.n)
        .ok_or_else(|| CliError::Usage("solve needs N (config key N or --n)".into()))?;
    if n < 2 {
        return Err(CliError::Usage(format!("N must be at least 2, got {n}")));
    }
    let problem = config.study_problem()?;
    let spec = problem.spec();
    if !classify(spec).discrete_theorem_applies {
        writeln!(
            log,
            "warning: declared constants do not meet the discrete solvability conditions"
        )?;
    }
    let report = newton_solve(spec, n, &config.solver_config())?;
    writeln!(
        log,
        "status: {:?}, iterations: {}, residual: {:e}, tolerance: {:e}",
        report.status, report.iterations, report.residual_norm, report.tolerance
    )?;
    if !report.converged() {
        if let Some(msg) = &report.message {
            writeln!(log, "{msg}")?;
        }
        return Ok(EXIT_SOLVER_FAILURE);
    }
    csv::write_solution(out, &report.solution)?;
    let sup = report.solution.sup_norm();
    let v_sup = spec.v_sup_on_grid(n).map_err(ProblemError::from)?;
    match apriori_bound(spec, v_sup) {
        Ok(m) => writeln!(log, "sup|x_N| = {sup:e}, a-priori bound M = {m:e}")?,
        Err(_) => writeln!(log, "sup|x_N| = {sup:e}")?,
    }
    if let StudyProblem::Manufactured(m) = &problem {
        let x = &report.solution;
        let mut err = 0.0f64;
        for k in 0..=n {
            let exact = m.x_star.eval(x.node(k), 0.0).map_err(ProblemError::from)?;
            err = err.max((exact - x.values()[k]).abs());
        }
        writeln!(log, "max_k |x*(k/N) - x_N(k)| = {err:e}")?;
    }
    Ok(EXIT_OK)
}

fn run_converge(
    config: &ProblemConfig,
    opts: &RunOptions,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<i32, CliError> {
    let ns = opts
        .ns
        .clone()
        .or_else(|| config.ns.clone())
        .ok_or_else(|| CliError::Usage("converge needs Ns (config key Ns or --ns)".into()))?;
    let problem = config.study_problem()?;
    match run_study(&problem, &config.name, &ns, &config.solver_config()) {
        Ok(table) => {
            csv::write_convergence(out, &table)?;
            let source = match table.provenance {
                Provenance::Manufactured => "manufactured x*".to_string(),
                Provenance::FineGrid { n_ref } => format!("fine grid N = {n_ref}"),
            };
            writeln!(log, "reference: {source}")?;
            writeln!(
                log,
                "max N|Δx_N| over rows: {:e}",
                derivative_bound_check(&table)?
            )?;
            Ok(EXIT_OK)
        }
        Err(StudyError::SolveFailed {
            partial,
            failed_n,
            detail,
            ..
        }) => {
            csv::write_convergence(out, &partial)?;
            writeln!(log, "solve failed at N = {failed_n}: {detail}")?;
            Ok(EXIT_SOLVER_FAILURE)
        }
        Err(e) => Err(e.into()),
    }
}

/// One row of the `norms` table: the smallest ratio of consecutive chain
/// terms over all samples. Every ratio is at least 1 when the chain holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormChainRow {
    pub n: usize,
    pub samples: usize,
    pub min_ratios: [f64; 5],
    pub holds: bool,
}

pub const NORM_CHAIN_COLUMNS: [&str; 5] = [
    "half_delta_over_quarter_e",
    "n_over_half_delta",
    "sqrtn_sup_over_n",
    "n_delta_over_sqrtn_sup",
    "n2_e_over_n_delta",
];

/// Random elements of `E_N` with magnitudes spread over six decades.
pub fn norm_chain_table(ns: &[usize], samples: usize, seed: u64) -> Vec<NormChainRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ns.iter()
        .map(|&n| {
            let mut min_ratios = [f64::INFINITY; 5];
            for _ in 0..samples {
                let amplitude = 10f64.powf(rng.gen_range(-3.0..3.0));
                let x = GridFunction::from_fn(n, |_| rng.gen_range(-amplitude..amplitude))
                    .expect("finite samples on a valid grid");
                let chain = x.norms().chain(n);
                for (i, w) in chain.windows(2).enumerate() {
                    min_ratios[i] = min_ratios[i].min(w[1] / w[0]);
                }
            }
            NormChainRow {
                n,
                samples,
                min_ratios,
                holds: min_ratios.iter().all(|&r| r >= 1.0 - 1e-12),
            }
        })
        .collect()
}

fn run_norms(
    config: Option<&ProblemConfig>,
    opts: &RunOptions,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<i32, CliError> {
    let ns = opts
        .ns
        .clone()
        .or_else(|| opts.n.map(|n| vec![n]))
        .or_else(|| config.and_then(|c| c.ns.clone()))
        .or_else(|| config.and_then(|c| c.n.map(|n| vec![n])))
        .unwrap_or_else(|| (2..=64).collect());
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("N must be at least 2, got {n}")));
    }
    let rows = norm_chain_table(&ns, NORM_SAMPLES, opts.seed);
    writeln!(out, "N,samples,{},holds", NORM_CHAIN_COLUMNS.join(","))?;
    for row in &rows {
        let ratios: Vec<String> = row.min_ratios.iter().map(|&r| csv::real(r)).collect();
        writeln!(
            out,
            "{},{},{},{}",
            row.n,
            row.samples,
            ratios.join(","),
            row.holds
        )?;
    }
    let failures = rows.iter().filter(|r| !r.holds).count();
    writeln!(
        log,
        "chain 1/4|x|_E <= 1/2|x|_D <= |x|_N <= sqrt(N)|x|_inf <= N|x|_D <= N^2|x|_E: {} of {} grid sizes hold",
        rows.len() - failures,
        rows.len()
    )?;
    Ok(if failures == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}
