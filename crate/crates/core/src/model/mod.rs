//! Two-stage stochastic programs with a finite scenario set.
//!
//! ```text
//! maximize ⟨c, x⟩ + Σ_s P(s) Q(x, ξ_s)   subject to A x ≤ b, x ≥ 0
//! Q(x, ξ) = max { ⟨q(ξ), y⟩ : W(ξ) y ≤ h(ξ) − T(ξ) x, y ≥ 0 }
//! ```

mod generate;
mod io;
pub mod rng;

pub use generate::{generate_gaussian_instance, GeneratorConfig};
pub use io::{load_instance, read_instance, save_instance, write_instance, FORMAT_VERSION};

use crate::linprog::{solve_lp, LpError, LpProblem, LpStatus, Matrix, SolverOptions};
use std::fmt;
use thiserror::Error;

/// Tolerance on `Σ P(s) = 1`.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid program: {0}")]
    Validation(ValidationReport),
    #[error("first-stage problem is infeasible")]
    Infeasible,
    #[error("first-stage feasible set is unbounded along coordinate {coordinate}")]
    Unbounded { coordinate: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// First-stage data `(A, b, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstStageData {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl FirstStageData {
    pub fn m1(&self) -> usize {
        self.a.rows()
    }

    pub fn n1(&self) -> usize {
        self.a.cols()
    }

    /// `maximize ⟨c, x⟩ s.t. A x ≤ b, x ≥ 0`.
    pub fn lp(&self) -> Result<LpProblem, LpError> {
        LpProblem::new(self.c.clone(), self.a.clone(), self.b.clone())
    }
}

/// One realization `(T, W, h, q)` with its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub t: Matrix,
    pub w: Matrix,
    pub h: Vec<f64>,
    pub q: Vec<f64>,
    pub probability: f64,
}

impl Scenario {
    pub fn m2(&self) -> usize {
        self.w.rows()
    }

    pub fn n2(&self) -> usize {
        self.w.cols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StochasticProgram {
    pub first_stage: FirstStageData,
    /// Order is significant: all expectations are summed in this order.
    pub scenarios: Vec<Scenario>,
}

impl StochasticProgram {
    pub fn n1(&self) -> usize {
        self.first_stage.n1()
    }

    pub fn m1(&self) -> usize {
        self.first_stage.m1()
    }

    pub fn m2(&self) -> usize {
        self.scenarios.first().map_or(0, Scenario::m2)
    }

    pub fn n2(&self) -> usize {
        self.scenarios.first().map_or(0, Scenario::n2)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    FirstStageDimension(String),
    ScenarioDimension { scenario: usize, detail: String },
    NegativeProbability { scenario: usize, value: f64 },
    ProbabilitySum(f64),
    NonFinite(String),
    NoScenarios,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FirstStageDimension(d) => write!(f, "first stage: {d}"),
            Violation::ScenarioDimension { scenario, detail } => write!(f, "scenario {scenario}: {detail}"),
            Violation::NegativeProbability { scenario, value } => {
                write!(f, "scenario {scenario}: negative probability {value}")
            }
            Violation::ProbabilitySum(s) => write!(f, "probabilities sum to {s}"),
            Violation::NonFinite(loc) => write!(f, "non-finite entry in {loc}"),
            Violation::NoScenarios => write!(f, "no scenarios"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Lists every dimension, probability and finiteness violation.
pub fn validate(program: &StochasticProgram) -> ValidationReport {
    let mut violations = Vec::new();
    let fs = &program.first_stage;
    let (m1, n1) = (fs.m1(), fs.n1());
    if fs.b.len() != m1 {
        violations.push(Violation::FirstStageDimension(format!(
            "b has length {} but A has {m1} rows",
            fs.b.len()
        )));
    }
    if fs.c.len() != n1 {
        violations.push(Violation::FirstStageDimension(format!(
            "c has length {} but A has {n1} columns",
            fs.c.len()
        )));
    }
    if !fs.a.is_finite() {
        violations.push(Violation::NonFinite("A".into()));
    }
    if !all_finite(&fs.b) {
        violations.push(Violation::NonFinite("b".into()));
    }
    if !all_finite(&fs.c) {
        violations.push(Violation::NonFinite("c".into()));
    }

    if program.scenarios.is_empty() {
        violations.push(Violation::NoScenarios);
    }
    let (m2, n2) = (program.m2(), program.n2());
    for (s, sc) in program.scenarios.iter().enumerate() {
        let mut dim = |detail: String| {
            violations.push(Violation::ScenarioDimension { scenario: s, detail });
        };
        if sc.m2() != m2 || sc.n2() != n2 {
            dim(format!("W is {}x{} but scenario 0 has {m2}x{n2}", sc.m2(), sc.n2()));
        }
        if sc.t.rows() != sc.m2() {
            dim(format!("T has {} rows but W has {}", sc.t.rows(), sc.m2()));
        }
        if sc.t.cols() != n1 {
            dim(format!("T has {} columns but n1 = {n1}", sc.t.cols()));
        }
        if sc.h.len() != sc.m2() {
            dim(format!("h has length {} but W has {} rows", sc.h.len(), sc.m2()));
        }
        if sc.q.len() != sc.n2() {
            dim(format!("q has length {} but W has {} columns", sc.q.len(), sc.n2()));
        }
        for (name, ok) in [
            ("T", sc.t.is_finite()),
            ("W", sc.w.is_finite()),
            ("h", all_finite(&sc.h)),
            ("q", all_finite(&sc.q)),
            ("probability", sc.probability.is_finite()),
        ] {
            if !ok {
                violations.push(Violation::NonFinite(format!("scenario {s} {name}")));
            }
        }
        if sc.probability < 0.0 {
            violations.push(Violation::NegativeProbability {
                scenario: s,
                value: sc.probability,
            });
        }
    }
    if !program.scenarios.is_empty() {
        let total: f64 = program.scenarios.iter().map(|s| s.probability).sum();
        if !((total - 1.0).abs() <= PROBABILITY_SUM_TOL) {
            violations.push(Violation::ProbabilitySum(total));
        }
    }
    ValidationReport { violations }
}

/// Upper bound on `max { ‖x‖₂ : A x ≤ b, x ≥ 0 }`: the norm of the vector of
/// coordinatewise maxima, one LP per coordinate.
pub fn max_feasible_norm(first_stage: &FirstStageData, opts: &SolverOptions) -> Result<f64, ModelError> {
    let n = first_stage.n1();
    let mut sum_sq = 0.0;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let lp = LpProblem::new(e, first_stage.a.clone(), first_stage.b.clone())?;
        let sol = solve_lp(&lp, opts)?;
        match sol.status {
            LpStatus::Optimal => {
                let u = sol.objective.unwrap_or(0.0).max(0.0);
                sum_sq += u * u;
            }
            LpStatus::Infeasible => return Err(ModelError::Infeasible),
            LpStatus::Unbounded => return Err(ModelError::Unbounded { coordinate: j }),
        }
    }
    Ok(sum_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(m2: usize, n1: usize, n2: usize, p: f64) -> Scenario {
        let mut w = Matrix::zeros(m2, n2);
        for i in 0..m2.min(n2) {
            w[(i, i)] = 1.0;
        }
        Scenario {
            t: Matrix::zeros(m2, n1),
            w,
            h: vec![1.0; m2],
            q: vec![1.0; n2],
            probability: p,
        }
    }

    fn program(probs: &[f64]) -> StochasticProgram {
        StochasticProgram {
            first_stage: FirstStageData {
                a: Matrix::identity(2),
                b: vec![1.0, 1.0],
                c: vec![1.0, 1.0],
            },
            scenarios: probs.iter().map(|&p| scenario(3, 2, 2, p)).collect(),
        }
    }

    #[test]
    fn valid_program_has_empty_report() {
        assert!(validate(&program(&[0.5, 0.5])).is_valid());
    }

    #[test]
    fn probability_sum_violation() {
        let r = validate(&program(&[0.5, 0.6]));
        assert_eq!(r.violations, vec![Violation::ProbabilitySum(0.5 + 0.6)]);
        assert_eq!(r.violations[0].to_string(), "probabilities sum to 1.1");
    }

    #[test]
    fn wrong_technology_columns_names_scenario() {
        let mut p = program(&[0.5, 0.5]);
        p.scenarios[1].t = Matrix::zeros(3, 3);
        let r = validate(&p);
        assert_eq!(r.violations.len(), 1);
        match &r.violations[0] {
            Violation::ScenarioDimension { scenario, detail } => {
                assert_eq!(*scenario, 1);
                assert!(detail.contains("T has 3 columns"));
            }
            v => panic!("unexpected violation {v:?}"),
        }
    }

    #[test]
    fn empty_scenario_set_is_invalid() {
        let r = validate(&program(&[]));
        assert_eq!(r.violations, vec![Violation::NoScenarios]);
    }

    #[test]
    fn non_finite_and_negative_probability() {
        let mut p = program(&[1.5, -0.5]);
        p.first_stage.c[0] = f64::NAN;
        let r = validate(&p);
        assert!(r.violations.contains(&Violation::NonFinite("c".into())));
        assert!(r.violations.contains(&Violation::NegativeProbability {
            scenario: 1,
            value: -0.5
        }));
    }

    #[test]
    fn max_norm_of_box() {
        let fs = FirstStageData {
            a: Matrix::identity(2),
            b: vec![1.0, 1.0],
            c: vec![0.0, 0.0],
        };
        let r = max_feasible_norm(&fs, &SolverOptions::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn max_norm_of_simplex_over_bounds() {
        let fs = FirstStageData {
            a: Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            b: vec![1.0],
            c: vec![0.0, 0.0],
        };
        let r = max_feasible_norm(&fs, &SolverOptions::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn max_norm_with_zero_row_and_box() {
        // closed form: coordinatewise maxima all equal 2, bound 2√n
        let n = 3;
        let mut rows = vec![vec![0.0; n]];
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            rows.push(r);
        }
        let fs = FirstStageData {
            a: Matrix::from_rows(&rows).unwrap(),
            b: vec![0.5, 2.0, 2.0, 2.0],
            c: vec![0.0; n],
        };
        let r = max_feasible_norm(&fs, &SolverOptions::default()).unwrap();
        assert!((r - 2.0 * (n as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn max_norm_reports_unbounded_coordinate() {
        let fs = FirstStageData {
            a: Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
            b: vec![1.0],
            c: vec![0.0, 0.0],
        };
        assert!(matches!(
            max_feasible_norm(&fs, &SolverOptions::default()),
            Err(ModelError::Unbounded { coordinate: 1 })
        ));
    }
}
