//! Draws a Gaussian instance, writes it as JSON and reads it back.
//!
//! cargo run --example generate_instance -- [path]

use twostage::model::{generate_gaussian_instance, load_instance, save_instance, GeneratorConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("twostage_instance.json")
            .display()
            .to_string()
    });
    let program = generate_gaussian_instance(&GeneratorConfig::new(30, 5, 30, 5, 2.0, 10, 42));
    println!(
        "m1={} n1={} m2={} n2={} scenarios={}",
        program.m1(),
        program.n1(),
        program.m2(),
        program.n2(),
        program.scenarios.len()
    );
    println!("valid: {}", program.validate().is_valid());

    save_instance(&program, &path).unwrap();
    let back = load_instance(&path).unwrap();
    println!("wrote {path}; round trip exact: {}", back == program);
}
