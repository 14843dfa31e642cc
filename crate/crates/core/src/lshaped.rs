//! L-shaped (Benders) decomposition, single aggregated optimality cut per
//! iteration.
//!
//! Master: `maximize ⟨c, x⟩ + θ s.t. A x ≤ b, x ≥ 0, θ ≤ θ̄, cuts`, with the free
//! variable `θ` split as `θ⁺ − θ⁻`. Each iteration solves every scenario's
//! recourse at the master's `x` and adds
//! `θ ≤ Σ_ξ P(ξ) π(ξ)ᵀ (h(ξ) − T(ξ) x)` from the recourse duals `π(ξ)`.
//! Feasibility cuts are not generated; infeasible recourse is an error.

use crate::decouple::{solve_recourse_with_duals, RecourseError};
use crate::linprog::{dot, solve_lp, LpError, LpProblem, LpStatus, Matrix, Simplex, SolverOptions};
use crate::model::{max_feasible_norm, ModelError, StochasticProgram, ValidationReport};
use log::warn;
use rayon::prelude::*;
use thiserror::Error;

/// Used for `θ̄` when the bounding LPs cannot produce one.
pub const FALLBACK_THETA_BOUND: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LShapedError {
    #[error("invalid program: {0}")]
    InvalidProgram(ValidationReport),
    #[error("recourse of scenario {scenario} is {source} at the master solution")]
    Recourse {
        scenario: usize,
        x: Vec<f64>,
        source: RecourseError,
    },
    #[error("master problem is infeasible")]
    MasterInfeasible,
    #[error("master problem is unbounded")]
    MasterUnbounded,
    #[error("no convergence after {iterations} iterations: incumbent {objective}, gap {gap}")]
    NotConverged {
        objective: f64,
        x_best: Vec<f64>,
        gap: f64,
        iterations: usize,
    },
    #[error("first stage: {0}")]
    FirstStage(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl From<ModelError> for LShapedError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Unbounded { .. } => LShapedError::MasterUnbounded,
            ModelError::Infeasible => LShapedError::MasterInfeasible,
            ModelError::Lp(e) => LShapedError::Lp(e),
            other => LShapedError::FirstStage(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BendersOptions {
    pub gap_tol: f64,
    pub max_iters: usize,
    pub lp: SolverOptions,
    pub parallel: bool,
}

impl Default for BendersOptions {
    fn default() -> Self {
        Self {
            gap_tol: 0.02,
            max_iters: 500,
            lp: SolverOptions::default(),
            parallel: true,
        }
    }
}

/// `θ ≤ intercept + ⟨gradient, x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityCut {
    pub gradient: Vec<f64>,
    pub intercept: f64,
}

impl OptimalityCut {
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.intercept + dot(&self.gradient, x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BendersResult {
    /// Best incumbent `⟨c, x⟩ + E Q(x)`.
    pub objective: f64,
    pub x_best: Vec<f64>,
    pub iterations: usize,
    /// `(master upper bound, best incumbent)` per iteration.
    pub gap_history: Vec<(f64, f64)>,
    pub converged: bool,
    pub cuts: Vec<OptimalityCut>,
    pub theta_bound: f64,
}

impl BendersResult {
    pub fn final_gap(&self) -> f64 {
        self.gap_history
            .last()
            .map_or(f64::INFINITY, |&(ub, inc)| relative_gap(ub, inc))
    }
}

/// `(UB − incumbent) / max(|UB|, 1)`.
pub fn relative_gap(upper: f64, incumbent: f64) -> f64 {
    (upper - incumbent) / upper.abs().max(1.0)
}

/// `θ̄ = Σ P(ξ) UB(ξ)` where `UB(ξ) = max ⟨q, y⟩ s.t. W y ≤ h + ‖T‖_F R 1, y ≥ 0`
/// and `R` bounds the first-stage norm. Valid because `|T x|_i ≤ ‖T‖_F ‖x‖`.
pub fn initial_theta_bound(program: &StochasticProgram, opts: &SolverOptions) -> Result<f64, LShapedError> {
    let radius = max_feasible_norm(&program.first_stage, opts)?;
    let mut total = 0.0;
    for (s, sc) in program.scenarios.iter().enumerate() {
        let shift = sc.t.frobenius_norm() * radius;
        let rhs = sc.h.iter().map(|h| h + shift).collect();
        let lp = LpProblem::new(sc.q.clone(), sc.w.clone(), rhs)?;
        let sol = solve_lp(&lp, opts)?;
        match (sol.status, sol.objective) {
            (LpStatus::Optimal, Some(v)) => total += sc.probability * v,
            (status, _) => {
                warn!("bounding LP for scenario {s} is {status:?}; using theta bound {FALLBACK_THETA_BOUND}");
                return Ok(FALLBACK_THETA_BOUND);
            }
        }
    }
    Ok(total)
}

struct MasterLayout {
    n1: usize,
}

impl MasterLayout {
    fn width(&self) -> usize {
        self.n1 + 2
    }

    fn theta(&self, z: &[f64]) -> f64 {
        z[self.n1] - z[self.n1 + 1]
    }

    /// Row coefficients of `θ − ⟨g, x⟩ ≤ e`.
    fn cut_row(&self, cut: &OptimalityCut) -> Vec<f64> {
        let mut row: Vec<f64> = cut.gradient.iter().map(|g| -g).collect();
        row.push(1.0);
        row.push(-1.0);
        row
    }
}

fn master_problem(program: &StochasticProgram, theta_bound: f64) -> Result<LpProblem, LpError> {
    let fs = &program.first_stage;
    let layout = MasterLayout { n1: fs.n1() };
    let mut rows: Vec<Vec<f64>> =
        fs.a.iter_rows()
            .map(|r| {
                let mut v = r.to_vec();
                v.extend([0.0, 0.0]);
                v
            })
            .collect();
    let mut theta_row = vec![0.0; layout.width()];
    theta_row[layout.n1] = 1.0;
    theta_row[layout.n1 + 1] = -1.0;
    rows.push(theta_row);
    let mut rhs = fs.b.clone();
    rhs.push(theta_bound);
    let mut objective = fs.c.clone();
    objective.extend([1.0, -1.0]);
    LpProblem::new(objective, Matrix::from_rows(&rows).expect("rectangular"), rhs)
}

/// Runs the L-shaped method until the relative gap drops to `gap_tol`.
pub fn run_benders(program: &StochasticProgram, opts: &BendersOptions) -> Result<BendersResult, LShapedError> {
    let report = program.validate();
    if !report.is_valid() {
        return Err(LShapedError::InvalidProgram(report));
    }
    let layout = MasterLayout { n1: program.n1() };
    let theta_bound = initial_theta_bound(program, &opts.lp)?;
    let mut master = Simplex::new(&master_problem(program, theta_bound)?, opts.lp);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut history = Vec::new();
    let mut cuts = Vec::new();
    for iteration in 1..=opts.max_iters {
        let status = if iteration == 1 {
            master.solve()?
        } else {
            master.reoptimize()?
        };
        match status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(LShapedError::MasterInfeasible),
            LpStatus::Unbounded => return Err(LShapedError::MasterUnbounded),
        }
        let z = master.primal();
        let x = z[..layout.n1].to_vec();
        let first_stage_value = dot(&program.first_stage.c, &x);
        let upper = first_stage_value + layout.theta(&z);

        let solve = |s: usize| solve_recourse_with_duals(&program.scenarios[s], &x, &opts.lp);
        let results: Vec<_> = if opts.parallel {
            (0..program.scenarios.len()).into_par_iter().map(solve).collect()
        } else {
            (0..program.scenarios.len()).map(solve).collect()
        };

        let mut expected = 0.0;
        let mut intercept = 0.0;
        let mut gradient = vec![0.0; layout.n1];
        for (s, (sc, r)) in program.scenarios.iter().zip(results).enumerate() {
            let (value, duals) = r.map_err(|source| LShapedError::Recourse {
                scenario: s,
                x: x.clone(),
                source,
            })?;
            let p = sc.probability;
            expected += p * value;
            intercept += p * dot(&duals, &sc.h);
            for (g, tj) in gradient.iter_mut().zip(sc.t.mul_vec_transposed(&duals)) {
                *g -= p * tj;
            }
        }

        let incumbent = first_stage_value + expected;
        if best.as_ref().is_none_or(|(b, _)| incumbent > *b) {
            best = Some((incumbent, x));
        }
        let best_value = best.as_ref().map_or(incumbent, |(b, _)| *b);
        history.push((upper, best_value));

        if relative_gap(upper, best_value) <= opts.gap_tol {
            let (objective, x_best) = best.expect("set above");
            return Ok(BendersResult {
                objective,
                x_best,
                iterations: iteration,
                gap_history: history,
                converged: true,
                cuts,
                theta_bound,
            });
        }
        let cut = OptimalityCut { gradient, intercept };
        master.add_constraint(&layout.cut_row(&cut), cut.intercept)?;
        cuts.push(cut);
    }
    let (objective, x_best) = best.unwrap_or_default();
    let gap = history.last().map_or(f64::INFINITY, |&(u, b)| relative_gap(u, b));
    Err(LShapedError::NotConverged {
        objective,
        x_best,
        gap,
        iterations: opts.max_iters,
    })
}
