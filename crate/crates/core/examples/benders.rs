//! L-shaped method with a single aggregated cut per iteration, stopped at a 2%
//! relative gap, next to the exact extensive-form optimum.

use twostage::baselines::solve_extensive;
use twostage::linprog::SolverOptions;
use twostage::lshaped::{relative_gap, run_benders, BendersOptions};
use twostage::model::{generate_gaussian_instance, GeneratorConfig};

fn main() {
    let opts = BendersOptions::default();
    let (program, result) = (0..)
        .find_map(|seed| {
            let p = generate_gaussian_instance(&GeneratorConfig::new(40, 5, 40, 5, 2.0, 15, seed));
            run_benders(&p, &opts).ok().map(|r| (p, r))
        })
        .unwrap();

    println!("theta bound {:.4}", result.theta_bound);
    for (i, &(ub, inc)) in result.gap_history.iter().enumerate() {
        println!(
            "iter {:>3}  upper {:>12.6}  incumbent {:>12.6}  gap {:.4}",
            i + 1,
            ub,
            inc,
            relative_gap(ub, inc)
        );
    }
    let exact = solve_extensive(&program, &SolverOptions::default()).unwrap();
    println!(
        "benders {:.6}  extensive {:.6}  converged {}",
        result.objective, exact.objective, result.converged
    );
}
