//! Reference methods: the extensive form and naive decoupling.

use crate::ballstage::{solve_unconstrained_stage1, BallStageError, BallStageOptions};
use crate::decouple::{solve_recourse_fixed_x, RecourseError};
use crate::linprog::{dot, solve_lp, LpError, LpProblem, LpStatus, Matrix, SolverOptions};
use crate::model::{StochasticProgram, ValidationReport};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("invalid program: {0}")]
    InvalidProgram(ValidationReport),
    #[error("extensive form is infeasible")]
    Infeasible,
    #[error("extensive form is unbounded")]
    Unbounded,
    #[error("first stage: {0}")]
    FirstStage(#[from] BallStageError),
    #[error("recourse of scenario {scenario} at the first-stage optimum: {source}")]
    Recourse { scenario: usize, source: RecourseError },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensiveStats {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensiveSolution {
    /// `z*`.
    pub objective: f64,
    pub x_star: Vec<f64>,
    pub y_star: Vec<Vec<f64>>,
    pub build_stats: ExtensiveStats,
    pub iterations: usize,
}

/// The deterministic equivalent as one LP.
///
/// Variables are laid out as `(x, y(ξ₁), …, y(ξ_S))`; rows as `A x ≤ b` followed
/// by `T(ξ_s) x + W(ξ_s) y(ξ_s) ≤ h(ξ_s)` for each scenario in order. The
/// objective is `(c, P(ξ₁) q(ξ₁), …)`.
pub fn build_extensive(program: &StochasticProgram) -> Result<LpProblem, BaselineError> {
    let report = program.validate();
    if !report.is_valid() {
        return Err(BaselineError::InvalidProgram(report));
    }
    let fs = &program.first_stage;
    let (m1, n1, m2, n2) = (program.m1(), program.n1(), program.m2(), program.n2());
    let s_count = program.scenarios.len();
    let rows = m1 + s_count * m2;
    let cols = n1 + s_count * n2;

    let mut g = Matrix::zeros(rows, cols);
    for i in 0..m1 {
        g.row_mut(i)[..n1].copy_from_slice(fs.a.row(i));
    }
    let mut objective = Vec::with_capacity(cols);
    objective.extend_from_slice(&fs.c);
    let mut rhs = fs.b.clone();
    for (s, sc) in program.scenarios.iter().enumerate() {
        let y0 = n1 + s * n2;
        for i in 0..m2 {
            let row = g.row_mut(m1 + s * m2 + i);
            row[..n1].copy_from_slice(sc.t.row(i));
            row[y0..y0 + n2].copy_from_slice(sc.w.row(i));
        }
        objective.extend(sc.q.iter().map(|q| sc.probability * q));
        rhs.extend_from_slice(&sc.h);
    }
    Ok(LpProblem::new(objective, g, rhs)?)
}

/// Solves the extensive form and unpacks the blocks.
pub fn solve_extensive(program: &StochasticProgram, opts: &SolverOptions) -> Result<ExtensiveSolution, BaselineError> {
    let lp = build_extensive(program)?;
    let sol = solve_lp(&lp, opts)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(BaselineError::Infeasible),
        LpStatus::Unbounded => return Err(BaselineError::Unbounded),
    }
    let z = sol.primal.expect("optimal solutions carry a primal point");
    let n1 = program.n1();
    let n2 = program.n2();
    let y_star = (0..program.scenarios.len())
        .map(|s| z[n1 + s * n2..n1 + (s + 1) * n2].to_vec())
        .collect();
    Ok(ExtensiveSolution {
        objective: dot(lp.objective(), &z),
        x_star: z[..n1].to_vec(),
        y_star,
        build_stats: ExtensiveStats {
            rows: lp.num_rows(),
            cols: lp.num_vars(),
        },
        iterations: sol.iterations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaiveSolution {
    pub objective: f64,
    /// First-stage-only optimum `x̃`.
    pub x_tilde: Vec<f64>,
    /// `Q(x̃, ξ_s)` per scenario.
    pub recourse: Vec<f64>,
}

/// Fixes `x = x̃` from the first-stage-only problem, then solves each recourse:
/// `⟨c, x̃⟩ + Σ P(ξ) Q(x̃, ξ)`.
pub fn run_naive(
    program: &StochasticProgram,
    opts: &SolverOptions,
    parallel: bool,
) -> Result<NaiveSolution, BaselineError> {
    let report = program.validate();
    if !report.is_valid() {
        return Err(BaselineError::InvalidProgram(report));
    }
    let ball_opts = BallStageOptions {
        lp: *opts,
        ..Default::default()
    };
    let x_tilde = solve_unconstrained_stage1(&program.first_stage, &ball_opts)?;
    let solve = |s: usize| solve_recourse_fixed_x(&program.scenarios[s], &x_tilde.x_tau, opts);
    let values: Vec<Result<f64, RecourseError>> = if parallel {
        (0..program.scenarios.len()).into_par_iter().map(solve).collect()
    } else {
        (0..program.scenarios.len()).map(solve).collect()
    };
    let mut recourse = Vec::with_capacity(values.len());
    let mut objective = x_tilde.objective;
    for (s, (sc, v)) in program.scenarios.iter().zip(values).enumerate() {
        let q = v.map_err(|source| BaselineError::Recourse { scenario: s, source })?;
        objective += sc.probability * q;
        recourse.push(q);
    }
    Ok(NaiveSolution {
        objective,
        x_tilde: x_tilde.x_tau,
        recourse,
    })
}

/// `(z_e − z_naive) / |z_e| · 100`, signed.
pub fn ngap_percent(extensive: f64, naive: f64) -> f64 {
    (extensive - naive) / extensive.abs() * 100.0
}

/// `|z_e − ẑ*| / |z_e| · 100`.
pub fn dgap_percent(extensive: f64, decoupled: f64) -> f64 {
    (extensive - decoupled).abs() / extensive.abs() * 100.0
}
