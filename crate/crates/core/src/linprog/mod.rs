//! Dense linear programming core.
//!
//! Solves `maximize ⟨c, x⟩ subject to G x ≤ g, x ≥ 0` with a two-phase simplex
//! method on the slack-augmented problem. Phase I uses one auxiliary variable;
//! pricing is Dantzig's rule, switching to Bland's rule after a run of
//! `2 (m + n)` degenerate pivots. Every other module solves its LPs here.
//!
//! [`Simplex`] keeps the dictionary between calls so that rows can be appended
//! and the problem re-optimized with the dual simplex method (cutting planes,
//! Benders master problems).

mod matrix;
mod tableau;
mod verify;

pub use matrix::{dot, norm2, Matrix};
pub use verify::{verify_solution, VerificationReport};

use tableau::{DualOutcome, PivotRules, PrimalOutcome, Stalled, Tableau};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("simplex did not terminate within {iterations} iterations")]
    NumericalFailure { iterations: usize },
}

/// `maximize ⟨objective, x⟩ s.t. constraint_matrix · x ≤ rhs, x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraint_matrix: Matrix,
    rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, constraint_matrix: Matrix, rhs: Vec<f64>) -> Result<Self, LpError> {
        if constraint_matrix.rows() != rhs.len() {
            return Err(LpError::InvalidProblem(format!(
                "constraint matrix has {} rows but rhs has length {}",
                constraint_matrix.rows(),
                rhs.len()
            )));
        }
        if constraint_matrix.cols() != objective.len() {
            return Err(LpError::InvalidProblem(format!(
                "constraint matrix has {} columns but objective has length {}",
                constraint_matrix.cols(),
                objective.len()
            )));
        }
        if !constraint_matrix.is_finite() || !objective.iter().chain(&rhs).all(|v| v.is_finite()) {
            return Err(LpError::InvalidProblem("non-finite entry".into()));
        }
        Ok(Self {
            objective,
            constraint_matrix,
            rhs,
        })
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraint_matrix(&self) -> &Matrix {
        &self.constraint_matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Present iff `status == Optimal`.
    pub primal: Option<Vec<f64>>,
    /// One multiplier per `≤` row; present iff `status == Optimal`.
    pub duals: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Entering-column rule of the primal simplex. Both fall back to Bland's rule
/// after `2 (m + n)` consecutive degenerate pivots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pricing {
    /// Largest reduced cost.
    Dantzig,
    /// Largest `d_j² / w_j` with Devex reference weights `w_j`.
    #[default]
    Devex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub obj_tol: f64,
    pub pivot_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub opt_tol: f64,
    /// `None` picks `50 (m + n) + 1000`.
    pub max_iterations: Option<usize>,
    pub pricing: Pricing,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            obj_tol: 1e-7,
            pivot_tol: 1e-10,
            opt_tol: 1e-9,
            max_iterations: None,
            pricing: Pricing::Devex,
        }
    }
}

/// A simplex dictionary that survives between solves.
#[derive(Clone, Debug)]
pub struct Simplex {
    tableau: Tableau,
    objective: Vec<f64>,
    opts: SolverOptions,
    iterations: usize,
    status: Option<LpStatus>,
    needs_phase_one: bool,
    dual_feasible: bool,
}

impl Simplex {
    pub fn new(problem: &LpProblem, opts: SolverOptions) -> Self {
        let needs_phase_one = problem.rhs.iter().any(|&g| g < 0.0);
        let rows: Vec<&[f64]> = problem.constraint_matrix.iter_rows().collect();
        let tableau = Tableau::new(&rows, &problem.rhs, &problem.objective, needs_phase_one);
        Self {
            tableau,
            objective: problem.objective.clone(),
            opts,
            iterations: 0,
            status: None,
            needs_phase_one,
            dual_feasible: false,
        }
    }

    fn rules(&self) -> PivotRules {
        let m = self.tableau.rows();
        let n = self.objective.len();
        PivotRules {
            feas_tol: self.opts.feas_tol,
            opt_tol: self.opts.opt_tol,
            pivot_tol: self.opts.pivot_tol,
            stall_threshold: 2 * (m + n),
            max_iterations: self.iterations + self.opts.max_iterations.unwrap_or(50 * (m + n) + 1000),
            devex: self.opts.pricing == Pricing::Devex,
        }
    }

    fn stalled(&self) -> LpError {
        LpError::NumericalFailure {
            iterations: self.iterations,
        }
    }

    /// Runs Phase I (when some right-hand side is negative) and Phase II.
    pub fn solve(&mut self) -> Result<LpStatus, LpError> {
        let rules = self.rules();
        if self.needs_phase_one {
            self.needs_phase_one = false;
            let scale = self.tableau.min_rhs().map_or(0.0, |(_, b)| b.abs()).max(1.0);
            self.tableau.start_phase_one();
            let outcome = self
                .tableau
                .primal_simplex(&rules, &mut self.iterations)
                .map_err(|Stalled| self.stalled())?;
            debug_assert_eq!(outcome, PrimalOutcome::Optimal, "phase I objective is bounded by zero");
            if self.tableau.objective_value() < -self.opts.feas_tol * scale {
                self.status = Some(LpStatus::Infeasible);
                return Ok(LpStatus::Infeasible);
            }
            self.tableau.finish_phase_one(self.opts.pivot_tol);
            self.tableau.set_objective(&self.objective);
        }
        self.finish_primal()
    }

    /// Appends `⟨coeffs, x⟩ ≤ bound`. Call [`Simplex::reoptimize`] afterwards.
    pub fn add_constraint(&mut self, coeffs: &[f64], bound: f64) -> Result<(), LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::InvalidProblem(format!(
                "constraint has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.objective.len()
            )));
        }
        if !bound.is_finite() || !coeffs.iter().all(|v| v.is_finite()) {
            return Err(LpError::InvalidProblem("non-finite entry".into()));
        }
        self.tableau.add_row(coeffs, bound);
        Ok(())
    }

    /// Restores optimality after rows were added or the right-hand side moved:
    /// dual simplex to regain feasibility, then a primal clean-up pass.
    ///
    /// Without a dual feasible dictionary (never solved, or unbounded) the
    /// objective is zeroed first, which makes any dictionary dual feasible, so
    /// the dual simplex acts as a Phase I.
    pub fn reoptimize(&mut self) -> Result<LpStatus, LpError> {
        if self.status == Some(LpStatus::Infeasible) && !self.dual_feasible {
            return Ok(LpStatus::Infeasible);
        }
        let restore_objective = !self.dual_feasible;
        if restore_objective {
            if self.needs_phase_one {
                self.needs_phase_one = false;
                self.tableau.finish_phase_one(self.opts.pivot_tol);
            }
            self.tableau.set_objective(&vec![0.0; self.objective.len()]);
        }
        let rules = self.rules();
        let outcome = self
            .tableau
            .dual_simplex(&rules, &mut self.iterations)
            .map_err(|Stalled| self.stalled())?;
        if outcome == DualOutcome::Infeasible {
            self.status = Some(LpStatus::Infeasible);
            self.dual_feasible = !restore_objective;
            return Ok(LpStatus::Infeasible);
        }
        if restore_objective {
            self.tableau.set_objective(&self.objective);
        }
        self.finish_primal()
    }

    /// Replaces the right-hand side `g` by `g + delta`, keeping the current
    /// basis; call [`Simplex::reoptimize`] afterwards. Requires a dual feasible
    /// dictionary, i.e. a previous solve that ended optimal or was cut off as
    /// infeasible by the dual simplex.
    pub fn shift_rhs(&mut self, delta: &[f64]) -> Result<(), LpError> {
        if delta.len() != self.tableau.n_constraints() {
            return Err(LpError::InvalidProblem(format!(
                "shift has {} entries, problem has {} constraints",
                delta.len(),
                self.tableau.n_constraints()
            )));
        }
        if !self.dual_feasible {
            return Err(LpError::InvalidProblem(
                "right-hand side can only be shifted after an optimal solve".into(),
            ));
        }
        self.tableau.shift_rhs(delta);
        Ok(())
    }

    /// Removes constraints selected by `drop` whose slack is currently basic,
    /// i.e. rows that do not define the current vertex. The remaining
    /// constraints keep their order and are renumbered from zero. Returns the
    /// number removed.
    pub fn drop_inactive_constraints(&mut self, drop: impl Fn(usize) -> bool) -> usize {
        self.tableau.drop_basic_slack_rows(drop)
    }

    fn finish_primal(&mut self) -> Result<LpStatus, LpError> {
        let rules = self.rules();
        let status = match self
            .tableau
            .primal_simplex(&rules, &mut self.iterations)
            .map_err(|Stalled| self.stalled())?
        {
            PrimalOutcome::Optimal => LpStatus::Optimal,
            PrimalOutcome::Unbounded => LpStatus::Unbounded,
        };
        self.status = Some(status);
        self.dual_feasible = status == LpStatus::Optimal;
        Ok(status)
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Whether [`Simplex::shift_rhs`] can be applied.
    pub fn is_dual_feasible(&self) -> bool {
        self.dual_feasible
    }

    pub fn num_constraints(&self) -> usize {
        self.tableau.n_constraints()
    }

    /// Current basic solution (structural part).
    pub fn primal(&self) -> Vec<f64> {
        self.tableau.primal()
    }

    pub fn solution(&self) -> LpSolution {
        let status = self.status.unwrap_or(LpStatus::Infeasible);
        if status != LpStatus::Optimal {
            return LpSolution {
                status,
                primal: None,
                duals: None,
                objective: None,
                iterations: self.iterations,
            };
        }
        let x = self.tableau.primal();
        let objective = dot(&self.objective, &x);
        LpSolution {
            status,
            primal: Some(x),
            duals: Some(self.tableau.duals()),
            objective: Some(objective),
            iterations: self.iterations,
        }
    }
}

/// Solves `problem` from a slack basis.
pub fn solve_lp(problem: &LpProblem, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    let mut simplex = Simplex::new(problem, *opts);
    simplex.solve()?;
    Ok(simplex.solution())
}
