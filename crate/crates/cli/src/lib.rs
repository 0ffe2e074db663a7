//! Argument handling and subcommands for the `svtprox` binary.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | bad arguments, unreadable or malformed input |
//! | 2 | invalid `--f` function spec |
//! | 3 | threshold equation or completion solver did not converge |
//! | 4 | `verify` found a failing instance (repro written to `--output`) |

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use svtprox::io::{format_matrix, read_matrix, read_observed, write_matrix};
use svtprox::linalg::prox_objective;
use svtprox::solvers::{solve_accelerated, solve_pgd};
use svtprox::verify::{run_suite_with, ProxEngine, CERTIFICATE_TOL, DEFAULT_TRIALS};
use svtprox::{certify_optimality, generalized_svt, make_builtin, CompletionProblem, DenseMatrix, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FUNCTION: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "svtprox", version, about = "Generalized singular value thresholding toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the prox of tau*f(||X||_*) at an input matrix.
    Prox(ProxArgs),
    /// Complete a partially observed matrix with a proximal gradient solver.
    Complete(CompleteArgs),
    /// Run the seeded oracle and certificate suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ProxArgs {
    /// Input matrix, one comma-separated row per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the result matrix (stdout if omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON diagnostics.
    #[arg(long)]
    pub diag: Option<PathBuf>,
    #[arg(long)]
    pub tau: f64,
    /// linear | quadratic | exp | poly:c1,c2,...
    #[arg(long = "f", default_value = "linear")]
    pub function: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Pgd,
    FistaStyle,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// Observed entries, one `row,col,value` triplet per line (0-indexed).
    #[arg(long)]
    pub observed: PathBuf,
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "f", default_value = "linear")]
    pub function: String,
    #[arg(long, value_enum, default_value = "pgd")]
    pub solver: Solver,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Where to write the completed matrix (stdout if omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON solve report.
    #[arg(long)]
    pub diag: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instances per builtin function.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Where to write the first failing instance.
    #[arg(long, default_value = "verify-repro.json")]
    pub output: PathBuf,
}

#[derive(Debug, Serialize)]
struct CertificateDiag {
    passed: bool,
    w_spectral_norm: f64,
}

#[derive(Debug, Serialize)]
struct ProxDiag {
    j_star: usize,
    t_star: f64,
    equation_residual: f64,
    bisection_iterations: usize,
    retained_rank: usize,
    nuclear_norm: f64,
    objective: f64,
    certificate: CertificateDiag,
}

#[derive(Debug, Serialize)]
struct CompleteDiag<'a> {
    iterations: usize,
    converged: bool,
    objective_trace: &'a [f64],
    final_relative_change: f64,
    retained_rank: usize,
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::UnknownFunctionSpec(_) | Error::InvalidFunction(_) => EXIT_FUNCTION,
            Error::NonConvergence { .. } | Error::NoThresholdIndex => EXIT_NONCONVERGENCE,
            _ => EXIT_USAGE,
        };
        Failure { code, message: err.to_string() }
    }
}

fn io_failure(path: &Path, err: std::io::Error) -> Failure {
    Failure { code: EXIT_USAGE, message: format!("{}: {err}", path.display()) }
}

fn with_path(path: &Path, err: Error) -> Failure {
    let mut failure = Failure::from(err);
    failure.message = format!("{}: {}", path.display(), failure.message);
    failure
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("diagnostics serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn emit_matrix(path: Option<&Path>, m: &DenseMatrix) -> Result<(), Failure> {
    match path {
        Some(path) => write_matrix(path, m).map_err(|e| with_path(path, e)),
        None => {
            print!("{}", format_matrix(m));
            Ok(())
        }
    }
}

fn positive(name: &str, value: f64) -> Result<(), Failure> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Failure { code: EXIT_USAGE, message: format!("--{name} must be positive, got {value}") })
    }
}

pub fn cmd_prox(args: &ProxArgs) -> Result<i32, Failure> {
    positive("tau", args.tau)?;
    let func = make_builtin(&args.function)?;
    let y = read_matrix(&args.input).map_err(|e| with_path(&args.input, e))?;
    let result = generalized_svt(&y, &func, args.tau)?;
    let cert = certify_optimality(&y, &result, &func, args.tau, CERTIFICATE_TOL)?;
    if !cert.passed {
        log::warn!("optimality certificate failed: {cert:?}");
    }
    emit_matrix(args.output.as_deref(), &result.x_hat)?;
    if let Some(path) = &args.diag {
        let diag = ProxDiag {
            j_star: result.threshold.j_star,
            t_star: result.threshold.t_star,
            equation_residual: result.threshold.equation_residual,
            bisection_iterations: result.threshold.bisection_iterations,
            retained_rank: result.retained_rank,
            nuclear_norm: result.nuclear_norm,
            objective: prox_objective(y.as_nalgebra(), result.x_hat.as_nalgebra(), &func, args.tau)?,
            certificate: CertificateDiag { passed: cert.passed, w_spectral_norm: cert.w_spectral_norm },
        };
        write_json(path, &diag)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_complete(args: &CompleteArgs) -> Result<i32, Failure> {
    positive("lambda", args.lambda)?;
    positive("tol", args.tol)?;
    if args.max_iters == 0 {
        return Err(Failure { code: EXIT_USAGE, message: "--max-iters must be at least 1".into() });
    }
    let func = make_builtin(&args.function)?;
    let observed = read_observed(&args.observed).map_err(|e| with_path(&args.observed, e))?;
    let problem = CompletionProblem::new(args.rows, args.cols, observed, args.lambda, func)?;
    let report = match args.solver {
        Solver::Pgd => solve_pgd(&problem, args.max_iters, args.tol)?,
        Solver::FistaStyle => solve_accelerated(&problem, args.max_iters, args.tol)?,
    };
    emit_matrix(args.output.as_deref(), &report.x)?;
    if let Some(path) = &args.diag {
        let diag = CompleteDiag {
            iterations: report.iterations,
            converged: report.converged,
            objective_trace: &report.objective_trace,
            final_relative_change: report.final_relative_change,
            retained_rank: report.retained_rank,
        };
        write_json(path, &diag)?;
    }
    if report.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("solver stopped at the iteration cap ({}) without converging", args.max_iters);
        Ok(EXIT_NONCONVERGENCE)
    }
}

pub fn cmd_verify(args: &VerifyArgs, engine: ProxEngine) -> Result<i32, Failure> {
    let summary = run_suite_with(args.seed, args.trials, engine)?;
    print!("{}", summary.render());
    match &summary.first_failure {
        None => Ok(EXIT_OK),
        Some(repro) => {
            let mut text = repro.to_json();
            text.push('\n');
            fs::write(&args.output, text).map_err(|e| io_failure(&args.output, e))?;
            eprintln!(
                "{} trial {} failed; instance written to {}",
                repro.function,
                repro.trial,
                args.output.display()
            );
            Ok(EXIT_VERIFY)
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_engine(argv, generalized_svt)
}

/// [`run`], with `verify` checking `engine` instead of the library prox.
pub fn run_with_engine<I, T>(argv: I, engine: ProxEngine) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Prox(args) => cmd_prox(args),
        Command::Complete(args) => cmd_complete(args),
        Command::Verify(args) => cmd_verify(args, engine),
    };
    outcome.unwrap_or_else(|failure| {
        eprintln!("error: {}", failure.message);
        failure.code
    })
}
