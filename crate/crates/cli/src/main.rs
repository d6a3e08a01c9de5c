#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod check;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypersolve::bench::{self, BenchConfig};
use hypersolve::calculus::DerivativeMode;
use hypersolve::ipm::{self, Solver, SolverOptions, Termination, TraceFormat, TraceRow};
use hypersolve::problems::HyperbolicProgram;
use hypersolve::qp::{cone_check, ConeReport, QpSolution};
use hypersolve::univariate::{self, EigenMoments, UnivariateRestriction};
use hypersolve::Error;
use nalgebra::DVector;
use serde::Serialize;

const EXIT_INPUT: u8 = 1;
const EXIT_MAX_ITERS: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Affine-scaling interior point solver for hyperbolic programs.
///
/// Exit codes: 0 success, 1 input error, 2 iteration budget exhausted,
/// 3 numerical failure or failed check.
#[derive(Parser)]
#[command(name = "hypersolve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the report as JSON.
    Solve(SolveArgs),
    /// Cross-check oracle derivatives and moments against analytic formulas
    /// and finite differences.
    Check(CheckArgs),
    /// Dump the univariate restriction and hyperbolic eigenvalues at a point.
    Eigs(EigsArgs),
    /// Solve the quadratic relaxation at a point and report its certificate.
    Qp(QpArgs),
    /// Iteration and oracle-call scaling over random product-family LPs (CSV).
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// Relaxation radius, in (0, 1).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Target duality gap.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Compute derivatives from oracle evaluations only.
    #[arg(long)]
    oracle_derivatives: bool,
}

impl SolverFlags {
    fn apply(&self, base: &SolverOptions) -> Result<SolverOptions, CliError> {
        let mut opts = base.clone();
        if let Some(a) = self.alpha {
            opts.alpha = a;
        }
        if let Some(d) = self.delta {
            opts.delta = d;
        }
        if let Some(k) = self.max_iters {
            opts.max_iters = Some(k);
        }
        if self.oracle_derivatives {
            opts.derivatives = DerivativeMode::Oracle;
        }
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceArg {
    None,
    Csv,
    Jsonl,
}

impl From<TraceArg> for TraceFormat {
    fn from(t: TraceArg) -> Self {
        match t {
            TraceArg::None => TraceFormat::None,
            TraceArg::Csv => TraceFormat::Csv,
            TraceArg::Jsonl => TraceFormat::Jsonl,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    input: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Format of the per-iteration trace written to --trace-file.
    #[arg(long, value_enum, default_value = "jsonl")]
    trace: TraceArg,
    #[arg(long)]
    trace_file: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Zero all wall-clock fields so reports are byte-for-byte reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct CheckArgs {
    input: PathBuf,
    /// Seed for the random interior points and directions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random interior points checked besides e0.
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EigsArgs {
    input: PathBuf,
    /// Comma-separated point (defaults to the problem's e0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    /// Comma-separated direction (defaults to the polynomial's).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    direction: Option<Vec<f64>>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct QpArgs {
    input: PathBuf,
    /// Comma-separated center (defaults to the problem's e0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "product")]
    family: String,
    #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
    degrees: Vec<usize>,
    #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    oracle_derivatives: bool,
    #[arg(long)]
    no_timing: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Input(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Initialization(_)
            | Error::Capability(_)
            | Error::AssumptionViolation(_) => EXIT_INPUT,
            _ => EXIT_NUMERICAL,
        };
        Self { code, message: err.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::input(err.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HYPERSOLVE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Check(a) => run_check(a),
        Command::Eigs(a) => eigs(a),
        Command::Qp(a) => qp(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load(path: &Path) -> Result<HyperbolicProgram, CliError> {
    Ok(HyperbolicProgram::load(path)?)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::numerical(e.to_string()))?;
    text.push('\n');
    emit(output, &text)
}

fn point_or_e0(hp: &HyperbolicProgram, point: Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    let x = point.unwrap_or_else(|| hp.e0.clone());
    if x.len() != hp.dimension() {
        return Err(CliError::input(format!("point has {} entries, expected {}", x.len(), hp.dimension())));
    }
    Ok(x)
}

fn write_trace(path: &Path, format: TraceFormat, rows: &[TraceRow]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    match format {
        TraceFormat::None => {}
        TraceFormat::Jsonl => {
            let mut w = io::BufWriter::new(file);
            for row in rows {
                serde_json::to_writer(&mut w, row).map_err(|e| CliError::numerical(e.to_string()))?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        TraceFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            for row in rows {
                w.serialize(row).map_err(|e| CliError::numerical(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<u8, CliError> {
    let hp = load(&args.input)?;
    let mut opts = args.solver.apply(&hp.options)?;
    opts.trace = args.trace.into();
    hp.ensure_valid()?;
    let mut report = ipm::solve_with_options(&hp, &opts)?;
    if args.no_timing {
        report = report.without_timing();
    }
    if let Some(path) = &args.trace_file {
        if opts.trace != TraceFormat::None {
            write_trace(path, opts.trace, &report.trace)?;
        }
    }
    emit_json(args.output.as_deref(), &report)?;
    eprintln!(
        "{:?} after {} iterations: objective {:.10e}, gap {:.3e}, {} oracle calls",
        report.termination, report.iterations, report.objective, report.gap, report.oracle_calls
    );
    if let Some(msg) = &report.message {
        eprintln!("{msg}");
    }
    Ok(match report.termination {
        Termination::Converged => 0,
        Termination::MaxIterations => EXIT_MAX_ITERS,
        Termination::NumericalFailure => EXIT_NUMERICAL,
    })
}

fn run_check(args: CheckArgs) -> Result<u8, CliError> {
    let hp = load(&args.input)?;
    let poly = hp.polynomial()?;
    let report = check::run(&poly, &hp.e0, args.points, args.seed);
    emit_json(args.output.as_deref(), &report)?;
    if report.probe.flagged {
        eprintln!(
            "polynomial is not hyperbolic in its direction: relative imaginary residue {:.3e}",
            report.probe.max_relative_imag
        );
    }
    for m in report.metrics.iter().filter(|m| !m.passed) {
        eprintln!(
            "{}: {:.3e} exceeds {:.1e}{}",
            m.name,
            m.max_error,
            m.tolerance,
            m.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    Ok(if report.passed { 0 } else { EXIT_NUMERICAL })
}

#[derive(Serialize)]
struct EigsReport {
    point: Vec<f64>,
    direction: Vec<f64>,
    restriction: UnivariateRestriction,
    eigenvalues: Vec<f64>,
    moments: EigenMoments,
    analytic_eigenvalues: Option<Vec<f64>>,
}

fn eigs(args: EigsArgs) -> Result<u8, CliError> {
    let hp = load(&args.input)?;
    let poly = hp.polynomial()?;
    let x = point_or_e0(&hp, args.point)?;
    let direction = args.direction.unwrap_or_else(|| poly.direction().to_vec());
    if direction.len() != x.len() {
        return Err(CliError::input(format!("direction has {} entries, expected {}", direction.len(), x.len())));
    }
    let restriction = univariate::restrict(&poly, &x, &direction)?;
    let eigenvalues = univariate::eigenvalues(&poly, &x, &direction)?;
    let moments = univariate::moments_from_restriction(&restriction)?;
    let analytic_eigenvalues = poly.analytic_eigenvalues(&x, &direction).ok();
    emit_json(
        args.output.as_deref(),
        &EigsReport { point: x, direction, restriction, eigenvalues, moments, analytic_eigenvalues },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct QpReport {
    center: Vec<f64>,
    alpha: f64,
    objective_at_center: f64,
    objective_at_optimizer: f64,
    solution: QpSolution,
    cone: ConeReport,
}

fn qp(args: QpArgs) -> Result<u8, CliError> {
    let hp = load(&args.input)?;
    let opts = args.solver.apply(&hp.options)?;
    hp.ensure_valid()?;
    let poly = hp.polynomial()?;
    let e = point_or_e0(&hp, args.point)?;
    let solver = Solver::new(&poly, &poly, hp.a_matrix()?, hp.b_vector(), hp.c_vector(), opts.clone())?;
    solver.check_initial(&e)?;
    let (q, solution) = solver.relax(&e)?;
    let x = DVector::from_column_slice(&solution.x_e);
    let c = hp.c_vector();
    let report = QpReport {
        objective_at_center: c.dot(&q.e),
        objective_at_optimizer: c.dot(&x),
        cone: cone_check(&q, &x, Some(&poly)),
        center: e,
        alpha: opts.alpha,
        solution,
    };
    emit_json(args.output.as_deref(), &report)?;
    Ok(0)
}

fn run_bench(args: BenchArgs) -> Result<u8, CliError> {
    if !(args.delta > 0.0) || !args.delta.is_finite() {
        return Err(CliError::input(format!("delta = {} must be positive", args.delta)));
    }
    if args.repetitions == 0 || args.degrees.is_empty() {
        return Err(CliError::input("bench needs at least one degree and one repetition"));
    }
    let cfg = BenchConfig {
        family: args.family,
        degrees: args.degrees,
        delta: args.delta,
        repetitions: args.repetitions,
        seed: args.seed,
        derivatives: if args.oracle_derivatives { DerivativeMode::Oracle } else { DerivativeMode::Analytic },
    };
    let mut rows = bench::run(&cfg)?;
    if args.no_timing {
        for row in &mut rows {
            row.wall_time_s = 0.0;
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::numerical(e.to_string()))?;
    emit(args.output.as_deref(), &String::from_utf8_lossy(&bytes))?;
    for row in rows.iter().filter(|r| r.termination != "converged") {
        eprintln!("degree {} repetition {}: {}", row.degree, row.repetition, row.termination);
    }
    Ok(0)
}
