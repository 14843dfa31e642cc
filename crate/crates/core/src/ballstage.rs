//! First-stage problem with a Euclidean norm cap:
//! `maximize ⟨c, x⟩ s.t. A x ≤ b, ‖x‖₂ ≤ τ, x ≥ 0`.
//!
//! The ball is approximated from outside by tangent cuts (Kelley's method).
//! Starting from the LP relaxation, each iterate `x_k` with `‖x_k‖ > τ(1 + ball_tol)`
//! adds `⟨x_k / ‖x_k‖, x⟩ ≤ τ`, which is valid for the ball and tight at the
//! radial projection of `x_k`; the dictionary is re-optimized by dual simplex.

use crate::linprog::{dot, norm2, LpError, LpProblem, LpStatus, Matrix, Simplex, SolverOptions};
use crate::model::rng::GaussianStream;
use crate::model::FirstStageData;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallStageError {
    #[error("first-stage problem is infeasible")]
    Infeasible,
    #[error("first-stage problem is unbounded")]
    Unbounded,
    #[error("radius must be a nonnegative number, got {0}")]
    InvalidRadius(f64),
    #[error("ball constraint still violated after {cuts} cuts (norm {norm}, radius {tau})")]
    MaxCutsExceeded { cuts: usize, norm: f64, tau: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallStageOptions {
    pub lp: SolverOptions,
    /// Relative slack accepted on `‖x‖ ≤ τ`.
    pub ball_tol: f64,
    pub max_cuts: usize,
    /// Seed for a `1e-7 ‖c‖` random perturbation of the cost, which makes the
    /// optimum unique. Off by default.
    pub perturbation_seed: Option<u64>,
}

impl Default for BallStageOptions {
    fn default() -> Self {
        Self {
            lp: SolverOptions::default(),
            ball_tol: 1e-7,
            max_cuts: 500,
            perturbation_seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallStageSolution {
    pub x_tau: Vec<f64>,
    /// `⟨c, x_tau⟩` with the unperturbed cost.
    pub objective: f64,
    pub norm: f64,
    /// `f64::INFINITY` for the uncapped problem.
    pub tau: f64,
    pub cuts_used: usize,
}

const PERTURBATION_SCALE: f64 = 1e-7;

fn working_cost(c: &[f64], opts: &BallStageOptions) -> Vec<f64> {
    match opts.perturbation_seed {
        None => c.to_vec(),
        Some(seed) => {
            let u = GaussianStream::new(seed, 0).unit_vector(c.len());
            let scale = PERTURBATION_SCALE * norm2(c);
            c.iter().zip(u).map(|(ci, ui)| ci + scale * ui).collect()
        }
    }
}

fn finish(c: &[f64], x: Vec<f64>, tau: f64, cuts_used: usize) -> BallStageSolution {
    BallStageSolution {
        objective: dot(c, &x),
        norm: norm2(&x),
        x_tau: x,
        tau,
        cuts_used,
    }
}

/// Solves the uncapped first-stage LP; the result's `tau` is `+∞`.
pub fn solve_unconstrained_stage1(
    first_stage: &FirstStageData,
    opts: &BallStageOptions,
) -> Result<BallStageSolution, BallStageError> {
    let cost = working_cost(&first_stage.c, opts);
    let lp = LpProblem::new(cost, first_stage.a.clone(), first_stage.b.clone())?;
    let mut simplex = Simplex::new(&lp, opts.lp);
    match simplex.solve()? {
        LpStatus::Optimal => Ok(finish(&first_stage.c, simplex.primal(), f64::INFINITY, 0)),
        LpStatus::Infeasible => Err(BallStageError::Infeasible),
        LpStatus::Unbounded => Err(BallStageError::Unbounded),
    }
}

/// Solves the norm-capped first-stage problem at radius `tau`.
pub fn solve_ball_constrained(
    first_stage: &FirstStageData,
    tau: f64,
    opts: &BallStageOptions,
) -> Result<BallStageSolution, BallStageError> {
    solve_ball_constrained_sweep(first_stage, &[tau], opts)
        .pop()
        .expect("one radius in, one result out")
}

/// Solves the capped problem for each radius in turn, reusing one dictionary.
///
/// Every cut `⟨u, x⟩ ≤ τ` with `‖u‖ = 1` is valid for the ball of any radius as
/// long as its right-hand side follows `τ`, so the cut pool carries over and
/// each new radius is a right-hand-side shift plus a dual simplex pass. The
/// per-radius cut budget counts only the cuts added at that radius.
pub fn solve_ball_constrained_sweep(
    first_stage: &FirstStageData,
    taus: &[f64],
    opts: &BallStageOptions,
) -> Vec<Result<BallStageSolution, BallStageError>> {
    let mut sweep = BallSweep::new(first_stage, opts);
    taus.iter().map(|&tau| sweep.solve(tau)).collect()
}

struct BallSweep<'a> {
    first_stage: &'a FirstStageData,
    opts: &'a BallStageOptions,
    cost: Vec<f64>,
    /// Dictionary and the radius its τ-dependent rows currently encode.
    warm: Option<(Simplex, f64)>,
    /// Rows whose bound is `τ`: box rows and cuts.
    tau_rows: Vec<bool>,
    /// Rows before this index come from `A` or the box; the rest are cuts.
    first_cut: usize,
}

impl<'a> BallSweep<'a> {
    fn new(first_stage: &'a FirstStageData, opts: &'a BallStageOptions) -> Self {
        Self {
            first_stage,
            opts,
            cost: working_cost(&first_stage.c, opts),
            warm: None,
            tau_rows: Vec::new(),
            first_cut: 0,
        }
    }

    fn solve(&mut self, tau: f64) -> Result<BallStageSolution, BallStageError> {
        let fs = self.first_stage;
        if !(tau >= 0.0) || tau.is_infinite() {
            return Err(BallStageError::InvalidRadius(tau));
        }
        if tau == 0.0 {
            return if fs.b.iter().all(|&b| b >= -self.opts.lp.feas_tol) {
                Ok(finish(&fs.c, vec![0.0; fs.n1()], 0.0, 0))
            } else {
                Err(BallStageError::Infeasible)
            };
        }
        let result = self.solve_positive(tau);
        if result.is_err() {
            self.warm = None;
        }
        result
    }

    fn status_to_result(status: LpStatus) -> Result<(), BallStageError> {
        match status {
            LpStatus::Optimal => Ok(()),
            LpStatus::Infeasible => Err(BallStageError::Infeasible),
            LpStatus::Unbounded => Err(BallStageError::Unbounded),
        }
    }

    fn cold_start(&mut self, tau: f64) -> Result<Simplex, BallStageError> {
        let fs = self.first_stage;
        let lp = LpProblem::new(self.cost.clone(), fs.a.clone(), fs.b.clone())?;
        let mut simplex = Simplex::new(&lp, self.opts.lp);
        self.tau_rows = vec![false; fs.m1()];
        match simplex.solve()? {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(BallStageError::Infeasible),
            LpStatus::Unbounded => {
                // x_j ≤ τ holds on the ball, so the boxed relaxation is still an outer approximation
                simplex = Simplex::new(&boxed(fs, self.cost.clone(), tau)?, self.opts.lp);
                self.tau_rows.extend(std::iter::repeat_n(true, fs.n1()));
                Self::status_to_result(simplex.solve()?)?;
            }
        }
        self.first_cut = self.tau_rows.len();
        Ok(simplex)
    }

    fn solve_positive(&mut self, tau: f64) -> Result<BallStageSolution, BallStageError> {
        let mut simplex = match self.warm.take() {
            Some((mut simplex, prev)) => {
                // cuts that do not touch the current vertex only slow the next radius down
                let first_cut = self.first_cut;
                simplex.drop_inactive_constraints(|i| i >= first_cut);
                self.tau_rows.truncate(simplex.num_constraints());
                let delta: Vec<f64> = self
                    .tau_rows
                    .iter()
                    .map(|&t| if t { tau - prev } else { 0.0 })
                    .collect();
                simplex.shift_rhs(&delta)?;
                Self::status_to_result(simplex.reoptimize()?)?;
                simplex
            }
            None => self.cold_start(tau)?,
        };

        let limit = tau * (1.0 + self.opts.ball_tol);
        let mut cuts = 0;
        loop {
            let x = simplex.primal();
            let norm = norm2(&x);
            if norm <= limit {
                self.warm = Some((simplex, tau));
                return Ok(finish(&self.first_stage.c, x, tau, cuts));
            }
            if cuts == self.opts.max_cuts {
                return Err(BallStageError::MaxCutsExceeded { cuts, norm, tau });
            }
            let normal: Vec<f64> = x.iter().map(|v| v / norm).collect();
            simplex.add_constraint(&normal, tau)?;
            self.tau_rows.push(true);
            cuts += 1;
            Self::status_to_result(simplex.reoptimize()?)?;
        }
    }
}

fn boxed(first_stage: &FirstStageData, cost: Vec<f64>, tau: f64) -> Result<LpProblem, LpError> {
    let (m, n) = (first_stage.m1(), first_stage.n1());
    let mut rows = first_stage.a.to_rows();
    rows.extend(Matrix::identity(n).to_rows());
    let mut rhs = first_stage.b.clone();
    rhs.extend(std::iter::repeat_n(tau, n));
    debug_assert_eq!(rows.len(), m + n);
    LpProblem::new(cost, Matrix::from_rows(&rows).expect("rectangular"), rhs)
}
