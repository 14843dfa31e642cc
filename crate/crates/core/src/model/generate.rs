use super::rng::GaussianStream;
use super::{FirstStageData, Scenario, StochasticProgram};
use crate::linprog::{norm2, Matrix};

/// Target `‖c‖₂` of the generated first-stage cost.
pub const COST_NORM: f64 = 0.5;
/// Target `‖q‖₂` of the generated recourse cost.
pub const RECOURSE_COST_NORM: f64 = 1.0;

/// Gaussian instance family: standard normal `A`, `T(ξ)`, `W(ξ)`; normalized
/// Gaussian `c` and `q`; `b = 1`; constant `h(ξ) = h_magnitude · 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
    pub h_magnitude: f64,
    pub num_scenarios: usize,
    pub seed: u64,
    /// When set, `A`, `c` and `q` are drawn from this seed instead of `seed`,
    /// so several instances can share one first-stage realization.
    pub first_stage_seed: Option<u64>,
}

impl GeneratorConfig {
    pub fn new(m1: usize, n1: usize, m2: usize, n2: usize, h_magnitude: f64, num_scenarios: usize, seed: u64) -> Self {
        Self {
            m1,
            n1,
            m2,
            n2,
            h_magnitude,
            num_scenarios,
            seed,
            first_stage_seed: None,
        }
    }
}

/// Stream ids under one seed, in draw order.
const STREAM_A: u64 = 0;
const STREAM_C: u64 = 1;
const STREAM_Q: u64 = 2;

fn stream_t(scenario: usize) -> u64 {
    3 + 2 * scenario as u64
}

fn stream_w(scenario: usize) -> u64 {
    4 + 2 * scenario as u64
}

fn gaussian_matrix(seed: u64, stream: u64, rows: usize, cols: usize) -> Matrix {
    Matrix::from_row_major(rows, cols, GaussianStream::new(seed, stream).gaussian_vec(rows * cols))
}

fn gaussian_with_norm(seed: u64, stream: u64, len: usize, target: f64) -> Vec<f64> {
    let v = GaussianStream::new(seed, stream).gaussian_vec(len);
    let n = norm2(&v);
    if n == 0.0 {
        return v;
    }
    v.into_iter().map(|x| x * (target / n)).collect()
}

/// Draws one instance. Stream layout per seed: 0 → `A` (row-major), 1 → `c`,
/// 2 → `q`, `3 + 2s` → `T(ξ_s)`, `4 + 2s` → `W(ξ_s)`.
pub fn generate_gaussian_instance(config: &GeneratorConfig) -> StochasticProgram {
    let fs_seed = config.first_stage_seed.unwrap_or(config.seed);
    let first_stage = FirstStageData {
        a: gaussian_matrix(fs_seed, STREAM_A, config.m1, config.n1),
        b: vec![1.0; config.m1],
        c: gaussian_with_norm(fs_seed, STREAM_C, config.n1, COST_NORM),
    };
    let q = gaussian_with_norm(fs_seed, STREAM_Q, config.n2, RECOURSE_COST_NORM);
    let probability = 1.0 / config.num_scenarios as f64;
    let scenarios = (0..config.num_scenarios)
        .map(|s| Scenario {
            t: gaussian_matrix(config.seed, stream_t(s), config.m2, config.n1),
            w: gaussian_matrix(config.seed, stream_w(s), config.m2, config.n2),
            h: vec![config.h_magnitude; config.m2],
            q: q.clone(),
            probability,
        })
        .collect();
    StochasticProgram { first_stage, scenarios }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one_shape_and_normalization() {
        let p = generate_gaussian_instance(&GeneratorConfig::new(100, 5, 100, 5, 2.0, 50, 0));
        assert!((norm2(&p.first_stage.c) - 0.5).abs() <= 1e-12);
        assert!(p.first_stage.b.iter().all(|&b| b == 1.0));
        assert_eq!(p.scenarios.len(), 50);
        for s in &p.scenarios {
            assert!((norm2(&s.q) - 1.0).abs() <= 1e-12);
            assert_eq!(s.probability, 0.02);
            assert!(s.h.iter().all(|&h| h == 2.0));
            assert_eq!((s.t.rows(), s.t.cols(), s.w.rows(), s.w.cols()), (100, 5, 100, 5));
        }
        assert!(p.validate().is_valid());
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = GeneratorConfig::new(7, 3, 5, 2, 3.0, 4, 11);
        assert_eq!(generate_gaussian_instance(&cfg), generate_gaussian_instance(&cfg));
    }

    #[test]
    fn shared_first_stage() {
        let mut a = GeneratorConfig::new(7, 3, 5, 2, 3.0, 4, 1);
        let mut b = GeneratorConfig::new(7, 3, 5, 2, 3.0, 4, 2);
        a.first_stage_seed = Some(99);
        b.first_stage_seed = Some(99);
        let (pa, pb) = (generate_gaussian_instance(&a), generate_gaussian_instance(&b));
        assert_eq!(pa.first_stage, pb.first_stage);
        assert_eq!(pa.scenarios[0].q, pb.scenarios[0].q);
        assert_ne!(pa.scenarios[0].t, pb.scenarios[0].t);
    }

    #[test]
    fn distinct_seeds_give_distinct_first_stage() {
        let mats: Vec<Matrix> = (0..100)
            .map(|seed| {
                generate_gaussian_instance(&GeneratorConfig::new(3, 2, 3, 2, 1.0, 1, seed))
                    .first_stage
                    .a
            })
            .collect();
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                assert_ne!(mats[i], mats[j], "seeds {i} and {j} collide");
            }
        }
    }

    #[test]
    fn technology_entries_are_standard_normal() {
        // 1000 seeds × 2 scenarios × 3×2 entries
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for seed in 0..1000 {
            let p = generate_gaussian_instance(&GeneratorConfig::new(3, 2, 3, 2, 1.0, 2, seed));
            for s in &p.scenarios {
                for &v in s.t.as_slice() {
                    sum += v;
                    sum_sq += v * v;
                    count += 1;
                }
            }
        }
        let n = count as f64;
        let mean = sum / n;
        let var = (sum_sq - n * mean * mean) / (n - 1.0);
        assert!(mean.abs() <= 3.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() <= 0.1, "variance {var}");
    }
}
