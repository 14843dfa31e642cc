//! Runs the norm-grid decoupling solver on one instance and prints the grid.

use twostage::decouple::{run_decoupling, DecouplingConfig};
use twostage::model::{generate_gaussian_instance, GeneratorConfig};

fn main() {
    let config = DecouplingConfig::default();
    let (seed, result) = (0..)
        .find_map(|seed| {
            let p = generate_gaussian_instance(&GeneratorConfig::new(50, 5, 50, 5, 2.0, 20, seed));
            run_decoupling(&p, &config).ok().map(|r| (seed, r))
        })
        .unwrap();

    println!(
        "seed {seed}: ẑ* = {:.6} at k = {} (τ = {:.2})",
        result.z_hat,
        result.best_k,
        config.delta * result.best_k as f64
    );
    println!(
        "‖x̃‖ = {:.4}, K_eff = {}, distinct norms solved = {}",
        result.x_tilde_norm, result.k_max_effective, result.distinct_norms
    );
    println!("{:>4} {:>8} {:>10} {:>10} {:>10}", "k", "X[k]", "Z1", "E Z2", "Z");
    let stride = (result.z.len() / 15).max(1);
    for k in (0..result.z.len()).step_by(stride) {
        println!(
            "{:>4} {:>8.4} {:>10.5} {:>10.5} {:>10.5}",
            k, result.x_norms[k], result.z1[k], result.z2_expected[k], result.z[k]
        );
    }
}
