//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when a solve fails or an
//! instance violates the model assumptions.

use crate::ballstage::{BallStageError, BallStageOptions};
use crate::baselines::{run_naive, solve_extensive, BaselineError};
use crate::bench::{format_table, run_benchmark, write_csv, BenchConfig};
use crate::decouple::{estimate_invariance_epsilon, run_decoupling, DecoupleError, DecouplingConfig};
use crate::linprog::SolverOptions;
use crate::lshaped::{run_benders, BendersOptions, LShapedError};
use crate::model::{
    generate_gaussian_instance, load_instance, save_instance, write_instance, GeneratorConfig, StochasticProgram,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "twostage",
    version,
    about = "Two-stage stochastic LP solvers and the Gaussian benchmark"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Random seed (instance seed for `generate`, probe seed, or benchmark seed base).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Norm grid step.
    #[arg(long, global = true, default_value_t = 0.01)]
    delta: f64,
    /// Initial number of grid steps.
    #[arg(long, global = true, default_value_t = 100)]
    kmax: usize,
    /// Relative gap at which the L-shaped method stops.
    #[arg(long = "gap-tol", global = true, default_value_t = 0.02)]
    gap_tol: f64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format of `bench`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Extensive,
    Decouple,
    Benders,
    Naive,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a Gaussian instance and write it as an instance file.
    Generate(GenerateArgs),
    /// Solve an instance file with one method.
    Solve {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Estimate the rotational-invariance defect at one radius.
    ProbeInvariance {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 20)]
        probes: usize,
    },
    /// Run the benchmark grid and report averaged gaps and times.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    m1: usize,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    m2: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long, default_value_t = 50)]
    scenarios: usize,
    /// Magnitude of the constant right-hand side `h`.
    #[arg(long, default_value_t = 2.0)]
    h: f64,
    /// Draw `A`, `c`, `q` from this seed instead of `--seed`.
    #[arg(long)]
    first_stage_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 50)]
    scenarios: usize,
    #[arg(long, default_value_t = 100)]
    m1: usize,
    #[arg(long, default_value_t = 100)]
    m2: usize,
    /// Comma-separated `n1 = n2` values.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5, 10, 15, 20])]
    n: Vec<usize>,
    /// Comma-separated `h` magnitudes.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 3.0, 4.0, 5.0])]
    h: Vec<f64>,
    /// Share one draw of `A`, `c`, `q` across all runs.
    #[arg(long)]
    fixed_first_stage: bool,
    /// Skip the discarded warm-up run of each cell.
    #[arg(long)]
    no_warmup: bool,
    #[arg(long, default_value_t = 10)]
    max_resamples: usize,
}

/// Entry point of the binary: parses `argv` (program name first) and runs the
/// command with the process streams.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`cli_main`] with explicit output streams.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Err(msg) = check_globals(&cli.global) {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    // commands write into a buffer so they can run inside a thread pool
    let mut buffer = Vec::new();
    let result = match cli.global.threads {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buffer)),
            Err(e) => Err(Failure::Runtime(format!("cannot start {threads} threads: {e}"))),
        },
        None => dispatch(&cli, &mut buffer),
    };
    let _ = out.write_all(&buffer);
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn check_globals(g: &GlobalArgs) -> Result<(), String> {
    if !(g.delta > 0.0) || !g.delta.is_finite() {
        return Err(format!("--delta must be a positive number, got {}", g.delta));
    }
    if g.kmax == 0 {
        return Err("--kmax must be at least 1".into());
    }
    if !(g.gap_tol >= 0.0) {
        return Err(format!("--gap-tol must be nonnegative, got {}", g.gap_tol));
    }
    if g.threads == Some(0) {
        return Err("--threads must be at least 1".into());
    }
    Ok(())
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Generate(args) => generate(g, args, out),
        Command::Solve { method, instance } => {
            let program = load_instance(instance).map_err(|e| io_failure(instance, e))?;
            solve(g, *method, &program, out)
        }
        Command::ProbeInvariance { instance, rho, probes } => {
            if *probes == 0 || !(*rho >= 0.0) {
                return Err(Failure::Usage("--probes must be positive and --rho nonnegative".into()));
            }
            let program = load_instance(instance).map_err(|e| io_failure(instance, e))?;
            let est = estimate_invariance_epsilon(&program, *rho, *probes, g.seed, &SolverOptions::default())
                .map_err(|e| Failure::Runtime(decouple_diagnostic(&e)))?;
            let _ = writeln!(out, "epsilon_hat: {}", est.epsilon_hat);
            let _ = writeln!(out, "rho: {}", est.norm_tested);
            let _ = writeln!(out, "probes: {}", est.num_probes);
            let _ = writeln!(out, "axis_recourse: {}", est.mean_recourse);
            Ok(())
        }
        Command::Bench(args) => bench(g, args, out),
    }
}

fn generate(g: &GlobalArgs, args: &GenerateArgs, out: &mut Vec<u8>) -> Result<(), Failure> {
    if [args.m1, args.n1, args.m2, args.n2, args.scenarios].contains(&0) {
        return Err(Failure::Usage("dimensions and --scenarios must be positive".into()));
    }
    if !args.h.is_finite() {
        return Err(Failure::Usage("--h must be finite".into()));
    }
    let mut config = GeneratorConfig::new(args.m1, args.n1, args.m2, args.n2, args.h, args.scenarios, g.seed);
    config.first_stage_seed = args.first_stage_seed;
    let program = generate_gaussian_instance(&config);
    match &g.output {
        Some(path) => save_instance(&program, path).map_err(|e| io_failure(path, e)),
        None => write_instance(&program, out).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn decouple_diagnostic(e: &DecoupleError) -> String {
    match e {
        DecoupleError::AssumptionViolation { site, source } => {
            let mut s = format!("assumption violated: recourse {source}\n  scenario: {}", site.scenario);
            if let Some(k) = site.k {
                s.push_str(&format!("\n  k: {k}"));
            }
            s.push_str(&format!("\n  rho: {}", site.rho));
            s
        }
        DecoupleError::FirstStage(e @ (BallStageError::Infeasible | BallStageError::Unbounded)) => {
            first_stage_violation(e)
        }
        other => other.to_string(),
    }
}

fn first_stage_violation(e: impl std::fmt::Display) -> String {
    format!("assumption violated: {e}\n  stage: first")
}

fn solve(g: &GlobalArgs, method: Method, program: &StochasticProgram, out: &mut Vec<u8>) -> Result<(), Failure> {
    let lp = SolverOptions::default();
    let start = Instant::now();
    let mut lines: Vec<(&str, String)> = Vec::new();
    let objective = match method {
        Method::Extensive => {
            let s = solve_extensive(program, &lp).map_err(|e| Failure::Runtime(baseline_diagnostic(&e)))?;
            lines.push(("rows", s.build_stats.rows.to_string()));
            lines.push(("cols", s.build_stats.cols.to_string()));
            lines.push(("pivots", s.iterations.to_string()));
            lines.push(("x", format!("{:?}", s.x_star)));
            s.objective
        }
        Method::Decouple => {
            let config = DecouplingConfig {
                delta: g.delta,
                k_max: g.kmax,
                ball: BallStageOptions {
                    lp,
                    ..Default::default()
                },
                ..Default::default()
            };
            let r = run_decoupling(program, &config).map_err(|e| Failure::Runtime(decouple_diagnostic(&e)))?;
            lines.push(("best_k", r.best_k.to_string()));
            lines.push(("tau", (g.delta * r.best_k as f64).to_string()));
            lines.push(("k_effective", r.k_max_effective.to_string()));
            lines.push(("x_tilde_norm", r.x_tilde_norm.to_string()));
            lines.push(("distinct_norms", r.distinct_norms.to_string()));
            lines.push(("x", format!("{:?}", r.x_best)));
            r.z_hat
        }
        Method::Benders => {
            let opts = BendersOptions {
                gap_tol: g.gap_tol,
                lp,
                ..Default::default()
            };
            match run_benders(program, &opts) {
                Ok(r) => {
                    lines.push(("iterations", r.iterations.to_string()));
                    lines.push(("gap", r.final_gap().to_string()));
                    lines.push(("theta_bound", r.theta_bound.to_string()));
                    lines.push(("x", format!("{:?}", r.x_best)));
                    r.objective
                }
                Err(e) => return Err(Failure::Runtime(benders_diagnostic(&e))),
            }
        }
        Method::Naive => {
            let r = run_naive(program, &lp, true).map_err(|e| Failure::Runtime(baseline_diagnostic(&e)))?;
            lines.push(("x_tilde", format!("{:?}", r.x_tilde)));
            r.objective
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let _ = writeln!(out, "objective: {objective}");
    let _ = writeln!(out, "time_s: {elapsed}");
    for (k, v) in lines {
        let _ = writeln!(out, "{k}: {v}");
    }
    Ok(())
}

fn baseline_diagnostic(e: &BaselineError) -> String {
    match e {
        BaselineError::Recourse { scenario, source } => {
            format!("assumption violated: recourse {source}\n  scenario: {scenario}")
        }
        BaselineError::FirstStage(e @ (BallStageError::Infeasible | BallStageError::Unbounded)) => {
            first_stage_violation(e)
        }
        BaselineError::Infeasible | BaselineError::Unbounded => format!("assumption violated: {e}"),
        other => other.to_string(),
    }
}

fn benders_diagnostic(e: &LShapedError) -> String {
    match e {
        LShapedError::Recourse { scenario, x, source } => {
            format!("assumption violated: recourse {source}\n  scenario: {scenario}\n  x: {x:?}")
        }
        LShapedError::NotConverged {
            objective,
            gap,
            iterations,
            ..
        } => format!("no convergence\n  iterations: {iterations}\n  gap: {gap}\n  incumbent: {objective}"),
        LShapedError::MasterInfeasible | LShapedError::MasterUnbounded => first_stage_violation(e),
        other => other.to_string(),
    }
}

fn bench(g: &GlobalArgs, args: &BenchArgs, out: &mut Vec<u8>) -> Result<(), Failure> {
    let config = BenchConfig {
        m1: args.m1,
        m2: args.m2,
        n_values: args.n.clone(),
        h_values: args.h.clone(),
        runs: args.runs,
        num_scenarios: args.scenarios,
        delta: g.delta,
        k_max: g.kmax,
        gap_tol: g.gap_tol,
        seed_base: g.seed,
        fixed_first_stage: args.fixed_first_stage,
        warmup: !args.no_warmup,
        max_resamples: args.max_resamples.max(1),
        ..Default::default()
    };
    let records = run_benchmark(&config).map_err(|e| Failure::Usage(e.to_string()))?;
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        match g.format {
            Format::Csv => write_csv(&records, &mut *w).map_err(std::io::Error::other),
            Format::Table => w.write_all(format_table(&records).as_bytes()),
        }
    };
    match &g.output {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| io_failure(path, e))?;
            emit(&mut file).map_err(|e| io_failure(path, e))?;
            // the table always goes to the terminal as well
            let _ = out.write_all(format_table(&records).as_bytes());
        }
        None => emit(&mut *out).map_err(|e| Failure::Runtime(e.to_string()))?,
    }
    if let Some(failed) = records.iter().find(|r| r.failure.is_some()) {
        return Err(Failure::Runtime(format!(
            "cell n = {}, h = {} aborted: {}",
            failed.n1,
            failed.h_magnitude,
            failed.failure.as_deref().unwrap_or_default()
        )));
    }
    Ok(())
}
