//! Norm-grid decoupling of the two stages.
//!
//! When the expected recourse depends on `x` (almost) only through `‖x‖₂`, the
//! two-stage optimum is approximated by sweeping a radius grid `τ = kΔ`:
//!
//! 1. solve the norm-capped first stage at every `τ`, recording its objective
//!    `Z1[k]` and solution norm `X[k]`;
//! 2. shrink the grid to `⌈max X / Δ⌉ + 2` points;
//! 3. solve every scenario's recourse with `x` replaced by `X[k] · e₁`;
//! 4. return `max_k Z1[k] + E Z2[k]`.
//!
//! Equal norms (the saturated tail where `X[k] = ‖x̃‖`) share one set of recourse
//! solves. All reductions run in index order, so results do not depend on the
//! thread schedule.

use crate::ballstage::{solve_ball_constrained_sweep, solve_unconstrained_stage1, BallStageError, BallStageOptions};
use crate::linprog::{dot, LpError, LpProblem, LpStatus, Simplex};
use crate::model::rng::GaussianStream;
use crate::model::{Scenario, StochasticProgram, ValidationReport};
use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

/// Norms closer than this share their recourse solves.
const NORM_DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecourseError {
    #[error("recourse problem is infeasible")]
    Infeasible,
    #[error("recourse problem is unbounded")]
    Unbounded,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Where a recourse failure happened.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecourseSite {
    pub scenario: usize,
    /// Grid index, when the failure came from the grid sweep.
    pub k: Option<usize>,
    pub rho: f64,
}

impl fmt::Display for RecourseSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario {}", self.scenario)?;
        if let Some(k) = self.k {
            write!(f, ", k = {k}")?;
        }
        write!(f, ", rho = {}", self.rho)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecoupleError {
    #[error("invalid program: {0}")]
    InvalidProgram(ValidationReport),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("assumption violated at {site}: {source}")]
    AssumptionViolation { site: RecourseSite, source: RecourseError },
    #[error("grid reaches {reach} but the unconstrained first-stage optimum has norm {required}; raise k_max")]
    GridTooShort { reach: f64, required: f64 },
    #[error(transparent)]
    FirstStage(#[from] BallStageError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecouplingConfig {
    /// Grid step Δ.
    pub delta: f64,
    /// Initial grid size K.
    pub k_max: usize,
    pub ball: BallStageOptions,
    pub parallel: bool,
    /// Keep the per-scenario table `Z2[s][k]`.
    pub keep_scenario_table: bool,
}

impl Default for DecouplingConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            k_max: 100,
            ball: BallStageOptions::default(),
            parallel: true,
            keep_scenario_table: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecouplingResult {
    pub z1: Vec<f64>,
    /// `X[k]`, norm of the capped first-stage solution at `τ = Δk`.
    pub x_norms: Vec<f64>,
    pub z2_expected: Vec<f64>,
    pub z: Vec<f64>,
    pub best_k: usize,
    pub z_hat: f64,
    pub k_max_effective: usize,
    /// `‖x̃‖₂` of the uncapped first-stage optimum.
    pub x_tilde_norm: f64,
    /// Capped first-stage solution at `best_k`.
    pub x_best: Vec<f64>,
    /// `Z2[s][k]` when requested.
    pub scenario_table: Option<Vec<Vec<f64>>>,
    /// Number of distinct norms for which recourse problems were solved.
    pub distinct_norms: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceEstimate {
    /// `max_u |E Q(ρu) − E Q(ρe₁)|` over the probed directions.
    pub epsilon_hat: f64,
    pub num_probes: usize,
    pub norm_tested: f64,
    /// `E Q(ρe₁)`.
    pub mean_recourse: f64,
}

/// `maximize ⟨q, y⟩ s.t. W y ≤ h − T x, y ≥ 0`.
pub fn recourse_problem(scenario: &Scenario, x: &[f64]) -> Result<LpProblem, LpError> {
    let tx = scenario.t.mul_vec(x);
    let rhs = scenario.h.iter().zip(&tx).map(|(h, t)| h - t).collect();
    LpProblem::new(scenario.q.clone(), scenario.w.clone(), rhs)
}

/// Optimal value and row multipliers of the recourse problem at `x`.
pub(crate) fn solve_recourse_with_duals(
    scenario: &Scenario,
    x: &[f64],
    opts: &crate::linprog::SolverOptions,
) -> Result<(f64, Vec<f64>), RecourseError> {
    let lp = recourse_problem(scenario, x)?;
    let mut simplex = Simplex::new(&lp, *opts);
    match simplex.solve()? {
        LpStatus::Optimal => {
            let sol = simplex.solution();
            Ok((sol.objective.unwrap_or(0.0), sol.duals.unwrap_or_default()))
        }
        LpStatus::Infeasible => Err(RecourseError::Infeasible),
        LpStatus::Unbounded => Err(RecourseError::Unbounded),
    }
}

/// `Q(x, ξ)`.
pub fn solve_recourse_fixed_x(
    scenario: &Scenario,
    x: &[f64],
    opts: &crate::linprog::SolverOptions,
) -> Result<f64, RecourseError> {
    solve_recourse_with_duals(scenario, x, opts).map(|(v, _)| v)
}

/// `Q(ρ e₁, ξ)`: the recourse right-hand side becomes `h − ρ · col₁(T)`.
pub fn solve_recourse_fixed_norm(
    scenario: &Scenario,
    rho: f64,
    opts: &crate::linprog::SolverOptions,
) -> Result<f64, RecourseError> {
    let mut x = vec![0.0; scenario.t.cols()];
    if let Some(first) = x.first_mut() {
        *first = rho;
    }
    solve_recourse_fixed_x(scenario, &x, opts)
}

/// `Q(ρ e₁, ξ)` along an increasing list of radii. Each radius after the first
/// moves the right-hand side by `−(ρ_i − ρ_{i−1}) col₁(T)` on the previous
/// dictionary; a fresh solve takes over whenever that dictionary is unusable.
pub fn recourse_norm_sweep(
    scenario: &Scenario,
    rhos: &[f64],
    opts: &crate::linprog::SolverOptions,
) -> Vec<Result<f64, RecourseError>> {
    let column: Vec<f64> = if scenario.t.cols() > 0 {
        scenario.t.column(0)
    } else {
        vec![0.0; scenario.t.rows()]
    };
    let mut warm: Option<(Simplex, f64)> = None;
    let mut out = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let status = match warm.take() {
            Some((mut simplex, prev)) => {
                let delta: Vec<f64> = column.iter().map(|t| -(rho - prev) * t).collect();
                let status = simplex.shift_rhs(&delta).and_then(|()| simplex.reoptimize());
                status.map(|st| (st, simplex))
            }
            None => fresh_norm_solve(scenario, rho, opts),
        };
        let result = match status {
            Ok((LpStatus::Optimal, simplex)) => {
                let value = dot(&scenario.q, &simplex.primal());
                warm = Some((simplex, rho));
                Ok(value)
            }
            Ok((LpStatus::Infeasible, simplex)) => {
                // a dual-simplex infeasibility keeps the dictionary reusable
                if simplex.is_dual_feasible() {
                    warm = Some((simplex, rho));
                }
                Err(RecourseError::Infeasible)
            }
            Ok((LpStatus::Unbounded, _)) => Err(RecourseError::Unbounded),
            Err(e) => Err(e.into()),
        };
        out.push(result);
    }
    out
}

fn fresh_norm_solve(
    scenario: &Scenario,
    rho: f64,
    opts: &crate::linprog::SolverOptions,
) -> Result<(LpStatus, Simplex), LpError> {
    let mut x = vec![0.0; scenario.t.cols()];
    if let Some(first) = x.first_mut() {
        *first = rho;
    }
    let mut simplex = Simplex::new(&recourse_problem(scenario, &x)?, *opts);
    let status = simplex.solve()?;
    Ok((status, simplex))
}

fn map_scenarios<T, F>(program: &StochasticProgram, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &Scenario) -> T + Sync + Send,
{
    if parallel {
        program
            .scenarios
            .par_iter()
            .enumerate()
            .map(|(s, sc)| f(s, sc))
            .collect()
    } else {
        program.scenarios.iter().enumerate().map(|(s, sc)| f(s, sc)).collect()
    }
}

/// Probability-weighted sum in scenario order; the first failing scenario wins.
fn expectation(
    program: &StochasticProgram,
    values: Vec<Result<f64, RecourseError>>,
) -> Result<f64, (usize, RecourseError)> {
    let mut total = 0.0;
    for (s, (sc, v)) in program.scenarios.iter().zip(values).enumerate() {
        total += sc.probability * v.map_err(|e| (s, e))?;
    }
    Ok(total)
}

/// `E_ξ Q(x, ξ)`, summed in scenario order.
pub fn expected_recourse_fixed_x(
    program: &StochasticProgram,
    x: &[f64],
    opts: &crate::linprog::SolverOptions,
    parallel: bool,
) -> Result<f64, (usize, RecourseError)> {
    let values = map_scenarios(program, parallel, |_, sc| solve_recourse_fixed_x(sc, x, opts));
    expectation(program, values)
}

/// `E_ξ Q(ρ e₁, ξ)`, summed in scenario order.
pub fn expected_recourse_fixed_norm(
    program: &StochasticProgram,
    rho: f64,
    opts: &crate::linprog::SolverOptions,
) -> Result<f64, DecoupleError> {
    if !(rho >= 0.0) {
        return Err(DecoupleError::InvalidConfig(format!(
            "rho must be nonnegative, got {rho}"
        )));
    }
    let values = map_scenarios(program, true, |_, sc| solve_recourse_fixed_norm(sc, rho, opts));
    expectation(program, values).map_err(|(scenario, source)| DecoupleError::AssumptionViolation {
        site: RecourseSite { scenario, k: None, rho },
        source,
    })
}

/// Runs the grid sweep and returns the decoupled estimate `ẑ*`.
pub fn run_decoupling(
    program: &StochasticProgram,
    config: &DecouplingConfig,
) -> Result<DecouplingResult, DecoupleError> {
    let report = program.validate();
    if !report.is_valid() {
        return Err(DecoupleError::InvalidProgram(report));
    }
    if !(config.delta > 0.0) || !config.delta.is_finite() {
        return Err(DecoupleError::InvalidConfig(format!(
            "delta must be positive, got {}",
            config.delta
        )));
    }
    if config.k_max == 0 {
        return Err(DecoupleError::InvalidConfig("k_max must be at least 1".into()));
    }
    let fs = &program.first_stage;
    let delta = config.delta;

    let x_tilde = solve_unconstrained_stage1(fs, &config.ball)?;
    let reach = delta * config.k_max as f64;
    if reach < x_tilde.norm {
        return Err(DecoupleError::GridTooShort {
            reach,
            required: x_tilde.norm,
        });
    }

    // First loop: capped first stage on k = 0..=K, one warm sweep over the radii
    // below ‖x̃‖. Radii at or beyond ‖x̃‖ have x̃ as their solution.
    let below: Vec<f64> = (0..=config.k_max)
        .map(|k| delta * k as f64)
        .take_while(|&tau| tau < x_tilde.norm)
        .collect();
    let mut z1 = Vec::with_capacity(config.k_max + 1);
    let mut x_norms = Vec::with_capacity(config.k_max + 1);
    let mut solutions = Vec::with_capacity(config.k_max + 1);
    for r in solve_ball_constrained_sweep(fs, &below, &config.ball) {
        let s = r?;
        z1.push(s.objective);
        x_norms.push(s.norm);
        solutions.push(s.x_tau);
    }
    z1.resize(config.k_max + 1, x_tilde.objective);
    x_norms.resize(config.k_max + 1, x_tilde.norm);
    solutions.resize(config.k_max + 1, x_tilde.x_tau.clone());

    // K ← ⌈a/Δ⌉ + 2. Indices past the first sweep lie beyond ‖x̃‖ and reuse x̃.
    let a = x_norms.iter().copied().fold(0.0, f64::max);
    let k_eff = (a / delta).ceil() as usize + 2;
    z1.resize(k_eff + 1, x_tilde.objective);
    x_norms.resize(k_eff + 1, x_tilde.norm);
    solutions.resize(k_eff + 1, x_tilde.x_tau.clone());

    // Group equal norms; X is nondecreasing up to solver tolerance, so neighbours suffice.
    let mut reps: Vec<(usize, f64)> = Vec::new();
    let mut rep_of = Vec::with_capacity(x_norms.len());
    for (k, &norm) in x_norms.iter().enumerate() {
        match reps.last() {
            Some(&(_, r)) if (norm - r).abs() <= NORM_DEDUP_TOL => {}
            _ => reps.push((k, norm)),
        }
        rep_of.push(reps.len() - 1);
    }

    // Second loop: every scenario over the distinct norms, warm-started in increasing order.
    let n_scen = program.scenarios.len();
    let rhos: Vec<f64> = reps.iter().map(|&(_, r)| r).collect();
    let lp_opts = &config.ball.lp;
    let sweeps = map_scenarios(program, config.parallel, |_, sc| {
        recourse_norm_sweep(sc, &rhos, lp_opts)
    });

    let mut table = vec![vec![0.0; reps.len()]; n_scen];
    for (s, sweep) in sweeps.into_iter().enumerate() {
        for (r, v) in sweep.into_iter().enumerate() {
            table[s][r] = v.map_err(|source| DecoupleError::AssumptionViolation {
                site: RecourseSite {
                    scenario: s,
                    k: Some(reps[r].0),
                    rho: reps[r].1,
                },
                source,
            })?;
        }
    }

    let rep_expectation: Vec<f64> = (0..reps.len())
        .map(|r| {
            program
                .scenarios
                .iter()
                .zip(&table)
                .map(|(sc, row)| sc.probability * row[r])
                .fold(0.0, |acc, v| acc + v)
        })
        .collect();
    let z2_expected: Vec<f64> = rep_of.iter().map(|&r| rep_expectation[r]).collect();
    let z: Vec<f64> = z1.iter().zip(&z2_expected).map(|(a, b)| a + b).collect();

    let mut best_k = 0;
    for (k, &v) in z.iter().enumerate() {
        if v > z[best_k] {
            best_k = k;
        }
    }

    debug_assert!(
        z1.windows(2).all(|w| w[1] >= w[0] - 1e-6 * (1.0 + w[0].abs())),
        "first-stage objective must be nondecreasing in the radius"
    );

    let scenario_table = config.keep_scenario_table.then(|| {
        table
            .iter()
            .map(|row| rep_of.iter().map(|&r| row[r]).collect())
            .collect()
    });

    Ok(DecouplingResult {
        z_hat: z[best_k],
        best_k,
        x_best: solutions.swap_remove(best_k),
        z1,
        x_norms,
        z2_expected,
        z,
        k_max_effective: k_eff,
        x_tilde_norm: x_tilde.norm,
        scenario_table,
        distinct_norms: reps.len(),
    })
}

/// Empirical rotational-invariance defect at radius `rho`, probing `num_probes`
/// uniformly random directions on the unit sphere.
pub fn estimate_invariance_epsilon(
    program: &StochasticProgram,
    rho: f64,
    num_probes: usize,
    seed: u64,
    opts: &crate::linprog::SolverOptions,
) -> Result<InvarianceEstimate, DecoupleError> {
    let n = program.n1();
    let mut stream = GaussianStream::new(seed, 0);
    let directions: Vec<Vec<f64>> = (0..num_probes).map(|_| stream.unit_vector(n)).collect();
    estimate_invariance_epsilon_along(program, rho, &directions, opts)
}

/// As [`estimate_invariance_epsilon`] with caller-supplied unit directions.
pub fn estimate_invariance_epsilon_along(
    program: &StochasticProgram,
    rho: f64,
    directions: &[Vec<f64>],
    opts: &crate::linprog::SolverOptions,
) -> Result<InvarianceEstimate, DecoupleError> {
    if !(rho >= 0.0) {
        return Err(DecoupleError::InvalidConfig(format!(
            "rho must be nonnegative, got {rho}"
        )));
    }
    if directions.is_empty() {
        return Err(DecoupleError::InvalidConfig(
            "at least one probe direction is required".into(),
        ));
    }
    let reference = expected_recourse_fixed_norm(program, rho, opts)?;
    let mut epsilon_hat = 0.0f64;
    for u in directions {
        let x: Vec<f64> = u.iter().map(|v| rho * v).collect();
        let value = expected_recourse_fixed_x(program, &x, opts, true).map_err(|(scenario, source)| {
            DecoupleError::AssumptionViolation {
                site: RecourseSite { scenario, k: None, rho },
                source,
            }
        })?;
        epsilon_hat = epsilon_hat.max((value - reference).abs());
    }
    Ok(InvarianceEstimate {
        epsilon_hat,
        num_probes: directions.len(),
        norm_tested: rho,
        mean_recourse: reference,
    })
}

/// Largest increase of `ρ ↦ E Q(ρ e₁)` along an increasing ladder of radii:
/// `max_{i ≤ j} (E Q(ρ_j e₁) − E Q(ρ_i e₁))⁺`. A spot check of the monotone tail.
pub fn estimate_monotonicity_defect(
    program: &StochasticProgram,
    ladder: &[f64],
    opts: &crate::linprog::SolverOptions,
) -> Result<f64, DecoupleError> {
    let mut values = Vec::with_capacity(ladder.len());
    for &rho in ladder {
        values.push(expected_recourse_fixed_norm(program, rho, opts)?);
    }
    let mut defect = 0.0f64;
    let mut running_min = f64::INFINITY;
    for v in values {
        running_min = running_min.min(v);
        defect = defect.max(v - running_min);
    }
    Ok(defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linprog::{Matrix, SolverOptions};
    use crate::model::FirstStageData;

    fn one_d(t: f64, h: f64, q: f64) -> Scenario {
        Scenario {
            t: Matrix::from_rows(&[vec![t]]).unwrap(),
            w: Matrix::from_rows(&[vec![1.0]]).unwrap(),
            h: vec![h],
            q: vec![q],
            probability: 1.0,
        }
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn recourse_without_technology_ignores_x() {
        let s = one_d(0.0, 3.0, 1.0);
        for x in [0.0, 1.0, 5.0] {
            assert_eq!(solve_recourse_fixed_x(&s, &[x], &opts()), Ok(3.0));
        }
    }

    #[test]
    fn recourse_closed_form() {
        // max(h − t x, 0) for q > 0
        let s = one_d(1.0, 3.0, 1.0);
        assert_eq!(solve_recourse_fixed_x(&s, &[1.0], &opts()), Ok(2.0));
        assert_eq!(solve_recourse_fixed_norm(&s, 1.0, &opts()), Ok(2.0));
        assert_eq!(
            solve_recourse_fixed_x(&s, &[4.0], &opts()),
            Err(RecourseError::Infeasible)
        );
    }

    #[test]
    fn nonpositive_recourse_cost_gives_zero() {
        let s = Scenario {
            t: Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap(),
            w: Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 1.0]]).unwrap(),
            h: vec![2.0, 2.0],
            q: vec![-1.0, 0.0],
            probability: 1.0,
        };
        assert_eq!(solve_recourse_fixed_x(&s, &[1.0, 1.0], &opts()), Ok(0.0));
    }

    #[test]
    fn unbounded_recourse_reported() {
        let s = Scenario {
            t: Matrix::from_rows(&[vec![0.0]]).unwrap(),
            w: Matrix::from_rows(&[vec![-1.0]]).unwrap(),
            h: vec![1.0],
            q: vec![1.0],
            probability: 1.0,
        };
        assert_eq!(
            solve_recourse_fixed_x(&s, &[0.0], &opts()),
            Err(RecourseError::Unbounded)
        );
    }

    #[test]
    fn fixed_norm_is_fixed_x_on_first_axis() {
        let p = crate::model::generate_gaussian_instance(&crate::model::GeneratorConfig::new(5, 3, 6, 3, 2.0, 3, 4));
        for sc in &p.scenarios {
            for rho in [0.0, 0.3, 0.7] {
                let a = solve_recourse_fixed_norm(sc, rho, &opts());
                let b = solve_recourse_fixed_x(sc, &[rho, 0.0, 0.0], &opts());
                assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
            }
            assert_eq!(
                solve_recourse_fixed_norm(sc, 0.0, &opts()),
                solve_recourse_fixed_x(sc, &[0.0; 3], &opts())
            );
        }
    }

    #[test]
    fn warm_sweep_matches_fresh_solves() {
        let rhos: Vec<f64> = (0..150).map(|k| 0.02 * k as f64).collect();
        let mut infeasible = 0;
        for seed in 0..6 {
            let p = crate::model::generate_gaussian_instance(&crate::model::GeneratorConfig::new(
                5, 4, 30, 6, 1.0, 4, seed,
            ));
            for sc in &p.scenarios {
                let sweep = recourse_norm_sweep(sc, &rhos, &opts());
                for (&rho, v) in rhos.iter().zip(sweep) {
                    match (v, solve_recourse_fixed_norm(sc, rho, &opts())) {
                        (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b} at {rho}"),
                        (a, b) => {
                            assert_eq!(a, b, "rho {rho}");
                            infeasible += 1;
                        }
                    }
                }
            }
        }
        // the radii reach far enough to leave the feasible region on some scenarios
        assert!(infeasible > 0);
    }

    fn program(scenarios: Vec<Scenario>) -> StochasticProgram {
        StochasticProgram {
            first_stage: FirstStageData {
                a: Matrix::from_rows(&[vec![1.0]]).unwrap(),
                b: vec![1.0],
                c: vec![0.5],
            },
            scenarios,
        }
    }

    #[test]
    fn expectation_of_identical_copies() {
        let mut s = one_d(1.0, 3.0, 1.0);
        let single = expected_recourse_fixed_norm(&program(vec![s.clone()]), 0.5, &opts()).unwrap();
        s.probability = 0.5;
        let double = expected_recourse_fixed_norm(&program(vec![s.clone(), s]), 0.5, &opts()).unwrap();
        assert_eq!(single, double);
    }

    #[test]
    fn weighted_mean_of_scenarios() {
        // Q = 2 and Q = 4 at ρ = 1
        let mut a = one_d(1.0, 3.0, 1.0);
        let mut b = one_d(1.0, 5.0, 1.0);
        a.probability = 0.25;
        b.probability = 0.75;
        let v = expected_recourse_fixed_norm(&program(vec![a, b]), 1.0, &opts()).unwrap();
        assert_eq!(v, 3.5);
    }

    #[test]
    fn expectation_ignores_radius_without_technology() {
        let mut a = one_d(0.0, 3.0, 1.0);
        let mut b = one_d(0.0, 1.0, 2.0);
        a.probability = 0.5;
        b.probability = 0.5;
        let p = program(vec![a, b]);
        let v0 = expected_recourse_fixed_norm(&p, 0.0, &opts()).unwrap();
        for rho in [1.0, 7.0] {
            assert_eq!(expected_recourse_fixed_norm(&p, rho, &opts()).unwrap(), v0);
        }
    }

    #[test]
    fn expectation_error_names_scenario() {
        let mut a = one_d(0.0, 3.0, 1.0);
        let mut b = one_d(1.0, 1.0, 1.0);
        a.probability = 0.5;
        b.probability = 0.5;
        match expected_recourse_fixed_norm(&program(vec![a, b]), 2.0, &opts()) {
            Err(DecoupleError::AssumptionViolation { site, source }) => {
                assert_eq!(site.scenario, 1);
                assert_eq!(source, RecourseError::Infeasible);
            }
            other => panic!("{other:?}"),
        }
    }

    /// Exhaustive evaluation of Z(τ) = c·x̃_τ + Q(‖x̃_τ‖) on the grid for the
    /// one-dimensional instance: x̃_τ = min(τ, 1), Q(ρ) = 3 − ρ.
    fn one_d_grid_oracle(delta: f64, k_max: usize) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for k in 0..=k_max {
            let x = (delta * k as f64).min(1.0);
            let z = 0.5 * x + (3.0 - x);
            if z > best.1 {
                best = (k, z);
            }
        }
        best
    }

    #[test]
    fn one_dimensional_grid_matches_exhaustive_oracle() {
        let p = program(vec![one_d(1.0, 3.0, 1.0)]);
        let cfg = DecouplingConfig {
            delta: 0.25,
            k_max: 8,
            keep_scenario_table: true,
            ..Default::default()
        };
        let r = run_decoupling(&p, &cfg).unwrap();
        let (k_star, z_star) = one_d_grid_oracle(0.25, 8);
        assert_eq!((k_star, z_star), (0, 3.0));
        assert_eq!(r.best_k, k_star);
        assert!((r.z_hat - z_star).abs() < 1e-12);
        // K_eff = ⌈1 / 0.25⌉ + 2
        assert_eq!(r.k_max_effective, 6);
        assert_eq!(r.z.len(), 7);
        for k in 0..=6 {
            let x = (0.25 * k as f64).min(1.0);
            assert!((r.x_norms[k] - x).abs() < 1e-6);
            assert!((r.z[k] - (3.0 - 0.5 * x)).abs() < 1e-6);
            assert_eq!(r.z[k], r.z1[k] + r.z2_expected[k]);
        }
        // saturated tail k = 4..=6 shares one recourse solve
        assert_eq!(r.distinct_norms, 5);
        let table = r.scenario_table.unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].len(), 7);
    }

    #[test]
    fn grid_too_short() {
        let p = program(vec![one_d(1.0, 3.0, 1.0)]);
        let cfg = DecouplingConfig {
            delta: 0.1,
            k_max: 5,
            ..Default::default()
        };
        assert!(matches!(
            run_decoupling(&p, &cfg),
            Err(DecoupleError::GridTooShort { .. })
        ));
    }

    #[test]
    fn grid_extends_past_initial_k() {
        // ‖x̃‖ = 1 reached exactly at K = 4 with Δ = 0.25: K_eff = 6 > K
        let p = program(vec![one_d(1.0, 3.0, 1.0)]);
        let cfg = DecouplingConfig {
            delta: 0.25,
            k_max: 4,
            ..Default::default()
        };
        let r = run_decoupling(&p, &cfg).unwrap();
        assert_eq!(r.k_max_effective, 6);
        assert_eq!(r.x_norms.len(), 7);
        assert_eq!(r.x_norms[6], 1.0);
    }

    #[test]
    fn bad_config_rejected() {
        let p = program(vec![one_d(1.0, 3.0, 1.0)]);
        for cfg in [
            DecouplingConfig {
                delta: 0.0,
                ..Default::default()
            },
            DecouplingConfig {
                k_max: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(run_decoupling(&p, &cfg), Err(DecoupleError::InvalidConfig(_))));
        }
    }

    #[test]
    fn invariance_probe_without_technology_is_exact() {
        let p = crate::model::generate_gaussian_instance(&crate::model::GeneratorConfig::new(5, 3, 6, 3, 2.0, 3, 4));
        let mut p0 = p.clone();
        for s in &mut p0.scenarios {
            s.t = Matrix::zeros(s.t.rows(), s.t.cols());
        }
        let e = estimate_invariance_epsilon(&p0, 0.8, 10, 1, &opts()).unwrap();
        assert_eq!(e.epsilon_hat, 0.0);
        assert_eq!(e.num_probes, 10);

        let axis = vec![vec![1.0, 0.0, 0.0]; 5];
        let e = estimate_invariance_epsilon_along(&p, 0.5, &axis, &opts()).unwrap();
        assert_eq!(e.epsilon_hat, 0.0);
    }

    #[test]
    fn monotonicity_defect_of_decreasing_map_is_zero() {
        let p = program(vec![one_d(1.0, 3.0, 1.0)]);
        let d = estimate_monotonicity_defect(&p, &[0.0, 0.5, 1.0, 2.0], &opts()).unwrap();
        assert_eq!(d, 0.0);
        let up = program(vec![one_d(-1.0, 3.0, 1.0)]);
        let d = estimate_monotonicity_defect(&up, &[0.0, 0.5, 1.0], &opts()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }
}
