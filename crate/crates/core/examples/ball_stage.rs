//! Traces the norm-capped first stage over a grid of radii. Below `‖x̃‖` the cap
//! is active and the objective grows; past it the solution stays at `x̃`.

use twostage::ballstage::{solve_ball_constrained_sweep, solve_unconstrained_stage1, BallStageOptions};
use twostage::model::{generate_gaussian_instance, GeneratorConfig};

fn main() {
    let opts = BallStageOptions::default();
    let fs = (0..)
        .map(|seed| generate_gaussian_instance(&GeneratorConfig::new(40, 8, 1, 1, 1.0, 1, seed)).first_stage)
        .find(|fs| solve_unconstrained_stage1(fs, &opts).is_ok())
        .unwrap();
    let free = solve_unconstrained_stage1(&fs, &opts).unwrap();
    println!("uncapped: objective {:.6}, ‖x̃‖ = {:.6}", free.objective, free.norm);

    let taus: Vec<f64> = (0..=12).map(|k| free.norm * k as f64 / 10.0).collect();
    println!("{:>10} {:>10} {:>12} {:>6}", "tau", "norm", "objective", "cuts");
    for (tau, sol) in taus.iter().zip(solve_ball_constrained_sweep(&fs, &taus, &opts)) {
        let sol = sol.unwrap();
        println!(
            "{:>10.5} {:>10.5} {:>12.6} {:>6}",
            tau, sol.norm, sol.objective, sol.cuts_used
        );
    }
}
