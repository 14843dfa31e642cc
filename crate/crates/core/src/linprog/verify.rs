use super::{dot, LpProblem, LpSolution, SolverOptions};

/// Residuals of a claimed optimal primal/dual pair, measured on the original data.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// `max(−x_j, (G x − g)_i)` over all components, floored at 0.
    pub max_primal_infeasibility: f64,
    /// `max(−y_i, c_j − (Gᵀ y)_j)`, floored at 0.
    pub max_dual_infeasibility: f64,
    /// `|⟨c, x⟩ − ⟨g, y⟩|`.
    pub duality_gap: f64,
    /// `max(|y_i · slack_i|, |x_j · reduced_cost_j|)`.
    pub complementarity_violation: f64,
    pub pass: bool,
}

/// Checks `solution` against `problem` with the tolerances in `opts`.
/// A non-optimal or incomplete solution fails with infinite residuals.
pub fn verify_solution(problem: &LpProblem, solution: &LpSolution, opts: &SolverOptions) -> VerificationReport {
    let (Some(x), Some(y)) = (&solution.primal, &solution.duals) else {
        return VerificationReport {
            max_primal_infeasibility: f64::INFINITY,
            max_dual_infeasibility: f64::INFINITY,
            duality_gap: f64::INFINITY,
            complementarity_violation: f64::INFINITY,
            pass: false,
        };
    };
    if x.len() != problem.num_vars() || y.len() != problem.num_rows() {
        return verify_solution(
            problem,
            &LpSolution {
                primal: None,
                ..solution.clone()
            },
            opts,
        );
    }
    let g = problem.rhs();
    let c = problem.objective();
    let gx = problem.constraint_matrix().mul_vec(x);
    let gty = problem.constraint_matrix().mul_vec_transposed(y);

    let mut primal_inf = 0.0f64;
    let mut primal_ok = true;
    for &xj in x {
        primal_inf = primal_inf.max(-xj);
        primal_ok &= xj >= -opts.feas_tol;
    }
    for (&lhs, &gi) in gx.iter().zip(g) {
        primal_inf = primal_inf.max(lhs - gi);
        primal_ok &= lhs - gi <= opts.feas_tol * (1.0 + gi.abs());
    }

    let mut dual_inf = 0.0f64;
    for &yi in y {
        dual_inf = dual_inf.max(-yi);
    }
    for (&cj, &aj) in c.iter().zip(&gty) {
        dual_inf = dual_inf.max(cj - aj);
    }

    let primal_obj = dot(c, x);
    let dual_obj = dot(g, y);
    let gap = (primal_obj - dual_obj).abs();

    let mut comp = 0.0f64;
    for ((&yi, &lhs), &gi) in y.iter().zip(&gx).zip(g) {
        comp = comp.max((yi * (gi - lhs)).abs());
    }
    for ((&xj, &aj), &cj) in x.iter().zip(&gty).zip(c) {
        comp = comp.max((xj * (aj - cj)).abs());
    }

    let scale = 1.0 + primal_obj.abs();
    let pass = primal_ok && dual_inf <= opts.obj_tol && gap <= opts.obj_tol * scale && comp <= opts.obj_tol * scale;
    VerificationReport {
        max_primal_infeasibility: primal_inf,
        max_dual_infeasibility: dual_inf,
        duality_gap: gap,
        complementarity_violation: comp,
        pass,
    }
}
