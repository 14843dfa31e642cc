//! A reduced benchmark grid: two sizes, two `h` values, a few runs per cell.
//!
//! cargo run --release --example table1 -- [runs]

use twostage::bench::{format_table, run_benchmark, write_csv, BenchConfig};

fn main() {
    let runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let config = BenchConfig {
        m1: 50,
        m2: 50,
        n_values: vec![5, 10],
        h_values: vec![2.0, 4.0],
        runs,
        num_scenarios: 20,
        seed_base: 2024,
        ..Default::default()
    };
    let records = run_benchmark(&config).unwrap();
    print!("{}", format_table(&records));
    println!();
    write_csv(&records, std::io::stdout()).unwrap();
}
