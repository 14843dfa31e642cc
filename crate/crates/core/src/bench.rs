//! Monte Carlo comparison of the decoupling algorithm with the extensive form,
//! naive decoupling and the L-shaped method on Gaussian instances.
//!
//! Every run draws one instance, solves it four ways and records the gaps
//! `Ngap`, `Dgap` and the wall-clock time of the extensive, decoupling and
//! L-shaped solves. Cells of the `(n, h)` grid are averaged over their runs.
//! Gap columns depend only on the seeds; timing columns do not.

use crate::ballstage::BallStageOptions;
use crate::baselines::{dgap_percent, ngap_percent, run_naive, solve_extensive, BaselineError};
use crate::decouple::{run_decoupling, DecoupleError, DecouplingConfig};
use crate::linprog::{Matrix, SolverOptions};
use crate::lshaped::{run_benders, BendersOptions, LShapedError};
use crate::model::{generate_gaussian_instance, GeneratorConfig, StochasticProgram};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Instant;
use thiserror::Error;

/// Seeds of different runs and cells stay this far apart, which leaves room
/// for the resamples of each run.
const RUN_STRIDE: u64 = 1_000;
const CELL_STRIDE: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub m1: usize,
    pub m2: usize,
    /// `n1 = n2` values, one grid row each.
    pub n_values: Vec<usize>,
    pub h_values: Vec<f64>,
    pub runs: usize,
    pub num_scenarios: usize,
    pub delta: f64,
    pub k_max: usize,
    pub gap_tol: f64,
    pub seed_base: u64,
    /// Draw `A`, `c`, `q` once from `seed_base` and share them across all runs.
    pub fixed_first_stage: bool,
    /// Solve one extra instance per cell before timing and discard it.
    pub warmup: bool,
    /// Consecutive resamples after which a run, and its cell, is abandoned.
    pub max_resamples: usize,
    /// Replace every `T(ξ)` by zero. Makes the recourse independent of `x`.
    pub zero_technology: bool,
    pub lp: SolverOptions,
    /// Parallel scenario solves inside each method.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            m1: 100,
            m2: 100,
            n_values: vec![5, 10, 15, 20],
            h_values: vec![2.0, 3.0, 4.0, 5.0],
            runs: 50,
            num_scenarios: 50,
            delta: 0.01,
            k_max: 100,
            gap_tol: 0.02,
            seed_base: 0,
            fixed_first_stage: false,
            warmup: true,
            max_resamples: 10,
            zero_technology: false,
            lp: SolverOptions::default(),
            parallel: true,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::InvalidConfig(msg));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.num_scenarios == 0 || self.m1 == 0 || self.m2 == 0 {
            return bad("m1, m2 and the scenario count must be positive".into());
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad("n values must be a nonempty list of positive sizes".into());
        }
        if self.h_values.is_empty() || self.h_values.iter().any(|h| !h.is_finite()) {
            return bad("h values must be a nonempty list of finite numbers".into());
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() || self.k_max == 0 {
            return bad(format!(
                "need delta > 0 and k_max ≥ 1, got {} and {}",
                self.delta, self.k_max
            ));
        }
        if !(self.gap_tol >= 0.0) {
            return bad(format!("gap tolerance must be nonnegative, got {}", self.gap_tol));
        }
        Ok(())
    }

    /// Seed of the first draw of `run` in grid cell `cell`.
    pub fn run_seed(&self, cell: usize, run: usize) -> u64 {
        self.seed_base
            .wrapping_add(CELL_STRIDE.wrapping_mul(cell as u64))
            .wrapping_add(RUN_STRIDE.wrapping_mul(run as u64))
    }

    fn instance(&self, n: usize, h: f64, seed: u64) -> StochasticProgram {
        let mut gen = GeneratorConfig::new(self.m1, n, self.m2, n, h, self.num_scenarios, seed);
        if self.fixed_first_stage {
            gen.first_stage_seed = Some(self.seed_base);
        }
        let mut p = generate_gaussian_instance(&gen);
        if self.zero_technology {
            for sc in &mut p.scenarios {
                sc.t = Matrix::zeros(self.m2, n);
            }
        }
        p
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        BenchError::Csv(e.to_string())
    }
}

/// One solved instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub z_extensive: f64,
    pub z_decoupled: f64,
    pub z_naive: f64,
    pub z_benders: f64,
    pub benders_converged: bool,
    pub benders_iterations: usize,
    pub ngap_pct: f64,
    pub dgap_pct: f64,
    pub t_extensive_s: f64,
    pub t_decouple_s: f64,
    pub t_benders_s: f64,
    /// Grid size that finally covered `‖x̃‖`.
    pub k_max_used: usize,
    /// Draws rejected before this one.
    pub resamples: usize,
}

/// One row of the benchmark table: averages over the runs of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRecord {
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
    pub h_magnitude: f64,
    pub ngap_pct: f64,
    pub dgap_pct: f64,
    pub t_extensive_s: f64,
    pub t_decouple_s: f64,
    pub t_benders_s: f64,
    /// Completed runs.
    pub runs: usize,
    pub seed_base: u64,
    pub resample_events: usize,
    /// Why the cell stopped early, if it did.
    pub failure: Option<String>,
}

/// A cell's average plus the runs behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub record: BenchmarkRecord,
    pub runs: Vec<RunRecord>,
}

fn baseline_rejection(what: &str, e: BaselineError) -> String {
    format!("{what}: {e}")
}

/// Solves one draw. `Err` is the reason the draw has to be replaced.
fn solve_run(config: &BenchConfig, program: &StochasticProgram, seed: u64) -> Result<RunRecord, String> {
    let lp = config.lp;
    let mut dconf = DecouplingConfig {
        delta: config.delta,
        k_max: config.k_max,
        ball: BallStageOptions {
            lp,
            ..Default::default()
        },
        parallel: config.parallel,
        keep_scenario_table: false,
    };

    let start = Instant::now();
    let decoupled = loop {
        match run_decoupling(program, &dconf) {
            Err(DecoupleError::GridTooShort { reach, required }) => {
                info!("seed {seed}: grid reaches {reach} < ‖x̃‖ = {required}, doubling K");
                dconf.k_max *= 2;
            }
            other => break other.map_err(|e: DecoupleError| format!("decoupling: {e}"))?,
        }
    };
    let t_decouple_s = start.elapsed().as_secs_f64();

    let naive = run_naive(program, &lp, config.parallel).map_err(|e| baseline_rejection("naive decoupling", e))?;

    let start = Instant::now();
    let extensive = solve_extensive(program, &lp).map_err(|e| baseline_rejection("extensive form", e))?;
    let t_extensive_s = start.elapsed().as_secs_f64();

    let bopts = BendersOptions {
        gap_tol: config.gap_tol,
        lp,
        parallel: config.parallel,
        ..Default::default()
    };
    let start = Instant::now();
    let benders = run_benders(program, &bopts);
    let t_benders_s = start.elapsed().as_secs_f64();
    let (z_benders, benders_converged, benders_iterations) = match benders {
        Ok(r) => (r.objective, true, r.iterations),
        Err(LShapedError::NotConverged {
            objective,
            iterations,
            gap,
            ..
        }) => {
            warn!("seed {seed}: L-shaped method stopped at gap {gap} after {iterations} iterations");
            (objective, false, iterations)
        }
        Err(e) => return Err(format!("L-shaped method: {e}")),
    };

    let z_e = extensive.objective;
    Ok(RunRecord {
        seed,
        z_extensive: z_e,
        z_decoupled: decoupled.z_hat,
        z_naive: naive.objective,
        z_benders,
        benders_converged,
        benders_iterations,
        ngap_pct: ngap_percent(z_e, naive.objective),
        dgap_pct: dgap_percent(z_e, decoupled.z_hat),
        t_extensive_s,
        t_decouple_s,
        t_benders_s,
        k_max_used: dconf.k_max,
        resamples: 0,
    })
}

/// Draws and solves run `run` of a cell, resampling with `seed + 1` while a
/// method reports an assumption violation. `Err` carries the last reason and
/// the number of rejected draws.
fn run_with_resampling(
    config: &BenchConfig,
    n: usize,
    h: f64,
    cell: usize,
    run: usize,
) -> Result<RunRecord, (String, usize)> {
    let mut seed = config.run_seed(cell, run);
    let mut resamples = 0;
    loop {
        let program = config.instance(n, h, seed);
        match solve_run(config, &program, seed) {
            Ok(mut r) => {
                r.resamples = resamples;
                return Ok(r);
            }
            Err(reason) => {
                resamples += 1;
                info!("n = {n}, h = {h}, run {run}: seed {seed} rejected ({reason}); resampling");
                if resamples >= config.max_resamples {
                    return Err((reason, resamples));
                }
                seed = seed.wrapping_add(1);
            }
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Runs one grid cell. `cell` indexes the grid in row-major `(n, h)` order and
/// only enters the seeds.
pub fn run_cell(config: &BenchConfig, n: usize, h: f64, cell: usize) -> Result<CellResult, BenchError> {
    config.validate()?;
    if config.warmup {
        // same instance as run 0, timings thrown away
        let _ = run_with_resampling(config, n, h, cell, 0);
    }
    let mut runs = Vec::with_capacity(config.runs);
    let mut resample_events = 0;
    let mut failure = None;
    for run in 0..config.runs {
        match run_with_resampling(config, n, h, cell, run) {
            Ok(r) => {
                resample_events += r.resamples;
                runs.push(r);
            }
            Err((reason, count)) => {
                resample_events += count;
                let msg = format!("run {run}: {count} consecutive draws rejected, last: {reason}");
                warn!("n = {n}, h = {h}: cell aborted, {msg}");
                failure = Some(msg);
                break;
            }
        }
    }
    let record = BenchmarkRecord {
        m1: config.m1,
        n1: n,
        m2: config.m2,
        n2: n,
        h_magnitude: h,
        ngap_pct: mean(runs.iter().map(|r| r.ngap_pct)),
        dgap_pct: mean(runs.iter().map(|r| r.dgap_pct)),
        t_extensive_s: mean(runs.iter().map(|r| r.t_extensive_s)),
        t_decouple_s: mean(runs.iter().map(|r| r.t_decouple_s)),
        t_benders_s: mean(runs.iter().map(|r| r.t_benders_s)),
        runs: runs.len(),
        seed_base: config.seed_base,
        resample_events,
        failure,
    };
    Ok(CellResult { record, runs })
}

/// Runs the whole grid, `n` major and `h` minor, and returns one record per cell.
pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchmarkRecord>, BenchError> {
    Ok(run_benchmark_detailed(config)?.into_iter().map(|c| c.record).collect())
}

/// As [`run_benchmark`], keeping the per-run records.
pub fn run_benchmark_detailed(config: &BenchConfig) -> Result<Vec<CellResult>, BenchError> {
    config.validate()?;
    let mut cells = Vec::new();
    for (i, &n) in config.n_values.iter().enumerate() {
        for (j, &h) in config.h_values.iter().enumerate() {
            let cell = i * config.h_values.len() + j;
            info!("cell n = {n}, h = {h}");
            cells.push(run_cell(config, n, h, cell)?);
        }
    }
    Ok(cells)
}

/// The CSV projection of a [`BenchmarkRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
    pub h: f64,
    #[serde(rename = "Ngap")]
    pub ngap: f64,
    #[serde(rename = "Dgap")]
    pub dgap: f64,
    pub t_e: f64,
    pub t_d: f64,
    pub t_b: f64,
    pub runs: usize,
    pub resamples: usize,
}

pub const CSV_HEADER: [&str; 12] = [
    "m1",
    "n1",
    "m2",
    "n2",
    "h",
    "Ngap",
    "Dgap",
    "t_e",
    "t_d",
    "t_b",
    "runs",
    "resamples",
];

impl From<&BenchmarkRecord> for CsvRow {
    fn from(r: &BenchmarkRecord) -> Self {
        Self {
            m1: r.m1,
            n1: r.n1,
            m2: r.m2,
            n2: r.n2,
            h: r.h_magnitude,
            ngap: r.ngap_pct,
            dgap: r.dgap_pct,
            t_e: r.t_extensive_s,
            t_d: r.t_decouple_s,
            t_b: r.t_benders_s,
            runs: r.runs,
            resamples: r.resample_events,
        }
    }
}

/// Writes the header and one row per record. Floats use the shortest
/// representation that reads back to the same value.
pub fn write_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow::from(r))?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush().map_err(|e| BenchError::Csv(e.to_string()))?;
    Ok(())
}

/// Parses CSV written by [`write_csv`], rejecting any other column layout.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Csv(format!("unexpected header {}", header.join(","))));
    }
    rd.deserialize().map(|r| r.map_err(BenchError::from)).collect()
}

/// Fixed-width table of the records, with aborted cells marked.
pub fn format_table(records: &[BenchmarkRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>4} {:>5} {:>4} {:>5} {:>8} {:>8} {:>9} {:>9} {:>9} {:>5} {:>9}",
        "m1", "n1", "m2", "n2", "h", "Ngap%", "Dgap%", "t_e[s]", "t_d[s]", "t_b[s]", "runs", "resamples"
    );
    for r in records {
        let _ = write!(
            out,
            "{:>5} {:>4} {:>5} {:>4} {:>5} {:>8.2} {:>8.2} {:>9.3} {:>9.3} {:>9.3} {:>5} {:>9}",
            r.m1,
            r.n1,
            r.m2,
            r.n2,
            r.h_magnitude,
            r.ngap_pct,
            r.dgap_pct,
            r.t_extensive_s,
            r.t_decouple_s,
            r.t_benders_s,
            r.runs,
            r.resample_events
        );
        if let Some(f) = &r.failure {
            let _ = write!(out, "  aborted ({f})");
        }
        out.push('\n');
    }
    out.push_str("times are wall-clock means and vary between executions; gaps are seed-deterministic\n");
    out
}
