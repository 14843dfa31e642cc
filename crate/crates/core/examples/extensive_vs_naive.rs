//! Compares the extensive form, naive decoupling and the decoupling solver on
//! the same draw, as Ngap and Dgap.

use twostage::baselines::{dgap_percent, ngap_percent, run_naive, solve_extensive};
use twostage::decouple::{run_decoupling, DecouplingConfig};
use twostage::linprog::SolverOptions;
use twostage::model::{generate_gaussian_instance, GeneratorConfig};

fn main() {
    let lp = SolverOptions::default();
    let mut shown = 0;
    for seed in 0.. {
        let p = generate_gaussian_instance(&GeneratorConfig::new(60, 5, 60, 5, 2.0, 20, seed));
        let (Ok(e), Ok(n), Ok(d)) = (
            solve_extensive(&p, &lp),
            run_naive(&p, &lp, true),
            run_decoupling(&p, &DecouplingConfig::default()),
        ) else {
            continue;
        };
        println!(
            "seed {seed:>3}: z_e {:>9.5}  z_n {:>9.5}  z_d {:>9.5}  Ngap {:>6.2}%  Dgap {:>6.2}%",
            e.objective,
            n.objective,
            d.z_hat,
            ngap_percent(e.objective, n.objective),
            dgap_percent(e.objective, d.z_hat)
        );
        shown += 1;
        if shown == 5 {
            break;
        }
    }
}
