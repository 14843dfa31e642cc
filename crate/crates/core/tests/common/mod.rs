//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use twostage::linprog::{LpProblem, LpStatus, Matrix};
use twostage::model::rng::GaussianStream;

/// Solves `M z = r` by Gaussian elimination with partial pivoting.
pub fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, p);
        r.swap(col, p);
        for i in col + 1..n {
            let f = m[i][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[i][k] -= f * m[col][k];
                }
                r[i] -= f * r[col];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * z[k]).sum();
        z[i] = (r[i] - s) / m[i][i];
    }
    Some(z)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All constraints of `A x ≤ b, x ≥ 0` as rows `g x ≤ r`.
fn stacked(a: &[Vec<f64>], b: &[f64], n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut g: Vec<Vec<f64>> = a.to_vec();
    let mut r: Vec<f64> = b.to_vec();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        g.push(e);
        r.push(0.0);
    }
    (g, r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Oracle {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

impl Oracle {
    pub fn status(&self) -> LpStatus {
        match self {
            Oracle::Optimal(_) => LpStatus::Optimal,
            Oracle::Infeasible => LpStatus::Infeasible,
            Oracle::Unbounded => LpStatus::Unbounded,
        }
    }
}

/// `max ⟨c, x⟩ s.t. A x ≤ b, x ≥ 0` by enumerating vertices and extreme rays.
///
/// The feasible set has no lines, so it is empty iff it has no vertex, and the
/// objective is unbounded iff some extreme ray of `{d ≥ 0, A d ≤ 0}` has
/// `⟨c, d⟩ > 0`. Extreme rays are the vertices of that cone cut by `Σ d = 1`.
pub fn vertex_oracle(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Oracle {
    const FEAS: f64 = 1e-9;
    let n = c.len();
    let (g, r) = stacked(a, b, n);
    let rows = g.len();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();

    let mut best: Option<f64> = None;
    for s in subsets(rows, n) {
        let m: Vec<Vec<f64>> = s.iter().map(|&i| g[i].clone()).collect();
        let rhs: Vec<f64> = s.iter().map(|&i| r[i]).collect();
        if let Some(x) = solve_square(m, rhs) {
            if (0..rows).all(|i| dot(&g[i], &x) <= r[i] + FEAS * (1.0 + r[i].abs())) {
                let v = dot(c, &x);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    }
    let Some(best) = best else {
        return Oracle::Infeasible;
    };

    for s in subsets(rows, n - 1) {
        let mut m: Vec<Vec<f64>> = s.iter().map(|&i| g[i].clone()).collect();
        let mut rhs = vec![0.0; n - 1];
        m.push(vec![1.0; n]);
        rhs.push(1.0);
        if let Some(d) = solve_square(m, rhs) {
            if (0..rows).all(|i| dot(&g[i], &d) <= FEAS) && dot(c, &d) > 1e-9 {
                return Oracle::Unbounded;
            }
        }
    }
    Oracle::Optimal(best)
}

/// Random small LP with entries on a half-integer lattice, so ties and
/// degenerate vertices are common.
pub fn random_lp(seed: u64, max_m: usize, max_n: usize) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut s = GaussianStream::new(seed, 0);
    let mut int = |lo: i64, hi: i64| lo + (s.next_uniform() * (hi - lo + 1) as f64).floor() as i64;
    let n = int(1, max_n as i64) as usize;
    let m = int(1, max_m as i64) as usize;
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| int(-8, 10) as f64 / 2.0).collect())
        .collect();
    let b: Vec<f64> = (0..m).map(|_| int(-4, 16) as f64 / 2.0).collect();
    let c: Vec<f64> = (0..n).map(|_| int(-6, 10) as f64 / 2.0).collect();
    (a, b, c)
}

pub fn lp_from(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpProblem {
    LpProblem::new(c.to_vec(), Matrix::from_rows(a).unwrap(), b.to_vec()).unwrap()
}

/// `max ⟨c, x⟩ s.t. A x ≤ b, x ≥ 0, ‖x‖ ≤ τ` in the plane, exactly.
///
/// The optimum sits at a vertex of the polygon inside the disk, at a crossing
/// of an edge line with the circle, or at the tangent point `τ c / ‖c‖`.
/// Returns `None` when the region is empty.
pub fn planar_ball_oracle(a: &[Vec<f64>], b: &[f64], c: [f64; 2], tau: f64) -> Option<f64> {
    let (g, r) = stacked(a, b, 2);
    let tol = 1e-9;
    let feasible = |x: [f64; 2]| {
        x[0] * x[0] + x[1] * x[1] <= tau * tau * (1.0 + 1e-12) + 1e-18
            && g.iter().zip(&r).all(|(gi, ri)| gi[0] * x[0] + gi[1] * x[1] <= ri + tol)
    };
    let mut candidates: Vec<[f64; 2]> = Vec::new();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if let Some(x) = solve_square(vec![g[i].clone(), g[j].clone()], vec![r[i], r[j]]) {
                candidates.push([x[0], x[1]]);
            }
        }
        // g x = r meets the circle where the foot of the perpendicular ± t along the line.
        let nn = g[i][0] * g[i][0] + g[i][1] * g[i][1];
        if nn > 0.0 {
            let foot = [g[i][0] * r[i] / nn, g[i][1] * r[i] / nn];
            let d2 = tau * tau - (foot[0] * foot[0] + foot[1] * foot[1]);
            if d2 >= 0.0 {
                let t = (d2 / nn).sqrt();
                let dir = [-g[i][1], g[i][0]];
                candidates.push([foot[0] + t * dir[0], foot[1] + t * dir[1]]);
                candidates.push([foot[0] - t * dir[0], foot[1] - t * dir[1]]);
            }
        }
    }
    let cn = (c[0] * c[0] + c[1] * c[1]).sqrt();
    if cn > 0.0 {
        candidates.push([tau * c[0] / cn, tau * c[1] / cn]);
    }
    candidates
        .into_iter()
        .filter(|&x| feasible(x))
        .map(|x| c[0] * x[0] + c[1] * x[1])
        .max_by(f64::total_cmp)
}
