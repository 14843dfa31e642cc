//! Solves a small LP with the dense simplex, then tightens it with an extra row
//! and re-solves from the same dictionary.

use twostage::linprog::{solve_lp, verify_solution, LpProblem, Matrix, Simplex, SolverOptions};

fn main() {
    // maximize 3x + 2y  s.t.  x + y ≤ 4,  x + 3y ≤ 6,  x ≤ 3
    let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 3.0], vec![1.0, 0.0]]).unwrap();
    let lp = LpProblem::new(vec![3.0, 2.0], a, vec![4.0, 6.0, 3.0]).unwrap();
    let opts = SolverOptions::default();

    let sol = solve_lp(&lp, &opts).unwrap();
    println!("status     {:?}", sol.status);
    println!("objective  {}", sol.objective.unwrap());
    println!("x          {:?}", sol.primal.as_ref().unwrap());
    println!("duals      {:?}", sol.duals.as_ref().unwrap());
    let report = verify_solution(&lp, &sol, &opts);
    println!("certified  {} (duality gap {:.1e})", report.pass, report.duality_gap);

    let mut simplex = Simplex::new(&lp, opts);
    simplex.solve().unwrap();
    simplex.add_constraint(&[1.0, -1.0], 1.0).unwrap();
    let status = simplex.reoptimize().unwrap();
    println!(
        "after x - y <= 1: {:?}, x = {:?}, {} pivots in total",
        status,
        simplex.primal(),
        simplex.iterations()
    );
}
