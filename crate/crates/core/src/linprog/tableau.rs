//! Dense simplex tableau in dictionary form.
//!
//! Every basic variable is kept as `x_B[i] = rhs[i] - Σ_k a[i][k] · x_N[k]` and the
//! objective as `z = obj_value + Σ_k obj[k] · x_N[k]`. Only nonbasic columns are
//! stored, so a problem with `m` rows and `n` structural variables needs `m × n`
//! entries instead of `m × (m + n)`.
//!
//! Variable ids: `0..n` are structural, `n + i` is the slack of constraint `i`,
//! and [`ARTIFICIAL`] is the single Phase I auxiliary variable.

use rayon::prelude::*;

pub(crate) const ARTIFICIAL: usize = usize::MAX;

/// Below this many multiply-adds a pivot runs on the calling thread.
const PARALLEL_PIVOT_WORK: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PrimalOutcome {
    Optimal,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DualOutcome {
    Feasible,
    Infeasible,
}

/// Iteration limit hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Stalled;

#[derive(Clone, Copy, Debug)]
pub(crate) struct PivotRules {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    pub stall_threshold: usize,
    pub max_iterations: usize,
    pub devex: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Tableau {
    n_struct: usize,
    n_constraints: usize,
    width: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    obj: Vec<f64>,
    obj_value: f64,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    frozen: Vec<bool>,
    scratch: Vec<(usize, f64)>,
    devex: Vec<f64>,
}

impl Tableau {
    /// Slack basis for `G x ≤ g`, `x ≥ 0` with objective row `c`.
    /// `with_artificial` appends the Phase I column (coefficient −1 in every row).
    pub fn new(g_rows: &[&[f64]], rhs: &[f64], c: &[f64], with_artificial: bool) -> Self {
        let n = c.len();
        let m = rhs.len();
        let width = n + usize::from(with_artificial);
        let mut a = Vec::with_capacity(m * width);
        for row in g_rows {
            a.extend_from_slice(row);
            if with_artificial {
                a.push(-1.0);
            }
        }
        let mut nonbasic: Vec<usize> = (0..n).collect();
        let mut obj = c.to_vec();
        if with_artificial {
            nonbasic.push(ARTIFICIAL);
            obj.push(0.0);
        }
        Self {
            n_struct: n,
            n_constraints: m,
            width,
            a,
            rhs: rhs.to_vec(),
            obj,
            obj_value: 0.0,
            basic: (n..n + m).collect(),
            nonbasic,
            frozen: vec![false; width],
            scratch: Vec::new(),
            devex: vec![1.0; width],
        }
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    pub fn objective_value(&self) -> f64 {
        self.obj_value
    }

    pub fn min_rhs(&self) -> Option<(usize, f64)> {
        self.rhs.iter().copied().enumerate().min_by(|x, y| x.1.total_cmp(&y.1))
    }

    fn entry(&self, i: usize, k: usize) -> f64 {
        self.a[i * self.width + k]
    }

    fn artificial_column(&self) -> Option<usize> {
        self.nonbasic.iter().position(|&v| v == ARTIFICIAL)
    }

    /// Exchange basic row `r` with nonbasic column `j`.
    pub fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let inv = 1.0 / self.a[r * w + j];

        let prow = &mut self.a[r * w..(r + 1) * w];
        for v in prow.iter_mut() {
            *v *= inv;
        }
        prow[j] = inv;
        self.rhs[r] *= inv;
        let rhs_r = self.rhs[r];

        let mut nz = std::mem::take(&mut self.scratch);
        nz.clear();
        nz.extend(
            prow.iter()
                .enumerate()
                .filter(|&(k, &v)| k != j && v != 0.0)
                .map(|(k, &v)| (k, v)),
        );

        let update = |i: usize, row: &mut [f64], rhs_i: &mut f64| {
            if i == r {
                return;
            }
            let f = row[j];
            if f == 0.0 {
                return;
            }
            for &(k, v) in &nz {
                row[k] -= f * v;
            }
            row[j] = -f * inv;
            *rhs_i -= f * rhs_r;
        };

        if self.rhs.len() * (nz.len() + 1) >= PARALLEL_PIVOT_WORK {
            self.a
                .par_chunks_mut(w)
                .zip(self.rhs.par_iter_mut())
                .enumerate()
                .for_each(|(i, (row, rhs_i))| update(i, row, rhs_i));
        } else {
            self.a
                .chunks_mut(w)
                .zip(self.rhs.iter_mut())
                .enumerate()
                .for_each(|(i, (row, rhs_i))| update(i, row, rhs_i));
        }

        let f = self.obj[j];
        if f != 0.0 {
            for &(k, v) in &nz {
                self.obj[k] -= f * v;
            }
            self.obj[j] = -f * inv;
            self.obj_value += f * rhs_r;
        }
        let wq = self.devex[j];
        for &(k, v) in &nz {
            self.devex[k] = self.devex[k].max(v * v * wq);
        }
        self.devex[j] = (wq * inv * inv).max(1.0);
        self.scratch = nz;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[j]);
    }

    /// Primal simplex from a primal feasible dictionary.
    pub fn primal_simplex(&mut self, rules: &PivotRules, iterations: &mut usize) -> Result<PrimalOutcome, Stalled> {
        let mut degenerate_run = 0usize;
        self.devex.iter_mut().for_each(|w| *w = 1.0);
        loop {
            let bland = degenerate_run > rules.stall_threshold;
            let Some(j) = self.entering_column(rules.opt_tol, bland, rules.devex) else {
                return Ok(PrimalOutcome::Optimal);
            };
            let Some(r) = self.ratio_test(j, rules, bland) else {
                return Ok(PrimalOutcome::Unbounded);
            };
            if *iterations >= rules.max_iterations {
                return Err(Stalled);
            }
            let step = self.rhs[r].max(0.0) / self.entry(r, j);
            if step * self.obj[j] <= rules.feas_tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, j);
            *iterations += 1;
        }
    }

    fn entering_column(&self, opt_tol: f64, bland: bool, devex: bool) -> Option<usize> {
        let candidates = self
            .obj
            .iter()
            .enumerate()
            .filter(|&(k, &d)| d > opt_tol && !self.frozen[k]);
        if bland {
            candidates.min_by_key(|&(k, _)| self.nonbasic[k]).map(|(k, _)| k)
        } else {
            // first maximum wins
            candidates
                .map(|(k, &d)| (k, if devex { d * d / self.devex[k] } else { d }))
                .fold(None, |best: Option<(usize, f64)>, (k, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((k, d)),
                })
                .map(|(k, _)| k)
        }
    }

    /// Minimum-ratio row for entering column `j`; ties go to the largest pivot
    /// (or the smallest basic id under Bland's rule).
    fn ratio_test(&self, j: usize, rules: &PivotRules, bland: bool) -> Option<usize> {
        let mut min_ratio = f64::INFINITY;
        for i in 0..self.rows() {
            let a = self.entry(i, j);
            if a > rules.pivot_tol {
                min_ratio = min_ratio.min(self.rhs[i].max(0.0) / a);
            }
        }
        if !min_ratio.is_finite() {
            return None;
        }
        let window = min_ratio + 1e-12 * (1.0 + min_ratio);
        let mut best: Option<usize> = None;
        for i in 0..self.rows() {
            let a = self.entry(i, j);
            if a <= rules.pivot_tol || self.rhs[i].max(0.0) / a > window {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) if bland && self.basic[i] < self.basic[b] => Some(i),
                Some(b) if !bland && a > self.entry(b, j) => Some(i),
                keep => keep,
            };
        }
        best
    }

    /// Dual simplex from a dual feasible dictionary (all `obj ≤ opt_tol`).
    pub fn dual_simplex(&mut self, rules: &PivotRules, iterations: &mut usize) -> Result<DualOutcome, Stalled> {
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run > rules.stall_threshold;
            let Some(r) = self.leaving_row(rules.feas_tol, bland) else {
                return Ok(DualOutcome::Feasible);
            };
            let Some(j) = self.dual_ratio_test(r, rules, bland) else {
                return Ok(DualOutcome::Infeasible);
            };
            if *iterations >= rules.max_iterations {
                return Err(Stalled);
            }
            if self.obj[j].min(0.0) / self.entry(r, j) <= rules.opt_tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, j);
            *iterations += 1;
        }
    }

    fn leaving_row(&self, feas_tol: f64, bland: bool) -> Option<usize> {
        let candidates = self.rhs.iter().enumerate().filter(|&(_, &b)| b < -feas_tol);
        if bland {
            candidates.min_by_key(|&(i, _)| self.basic[i]).map(|(i, _)| i)
        } else {
            candidates
                .fold(None, |best: Option<(usize, f64)>, (i, &b)| match best {
                    Some((_, bb)) if bb <= b => best,
                    _ => Some((i, b)),
                })
                .map(|(i, _)| i)
        }
    }

    fn dual_ratio_test(&self, r: usize, rules: &PivotRules, bland: bool) -> Option<usize> {
        let mut min_ratio = f64::INFINITY;
        for k in 0..self.width {
            let a = self.entry(r, k);
            if a < -rules.pivot_tol && !self.frozen[k] {
                min_ratio = min_ratio.min(self.obj[k].min(0.0) / a);
            }
        }
        if !min_ratio.is_finite() {
            return None;
        }
        let window = min_ratio + 1e-12 * (1.0 + min_ratio);
        let mut best: Option<usize> = None;
        for k in 0..self.width {
            let a = self.entry(r, k);
            if a >= -rules.pivot_tol || self.frozen[k] || self.obj[k].min(0.0) / a > window {
                continue;
            }
            best = match best {
                None => Some(k),
                Some(b) if bland && self.nonbasic[k] < self.nonbasic[b] => Some(k),
                Some(b) if !bland && a < self.entry(r, b) => Some(k),
                keep => keep,
            };
        }
        best
    }

    /// Phase I entry pivot: bring the artificial into the most negative row,
    /// which makes every right-hand side nonnegative. Sets the Phase I objective.
    pub fn start_phase_one(&mut self) {
        let art = self
            .artificial_column()
            .expect("tableau built without artificial column");
        self.obj.iter_mut().for_each(|d| *d = 0.0);
        self.obj[art] = -1.0;
        self.obj_value = 0.0;
        if let Some((r, b)) = self.min_rhs() {
            if b < 0.0 {
                self.pivot(r, art);
            }
        }
    }

    /// Drives the artificial out of the basis (if it is there), then freezes its
    /// column at zero.
    pub fn finish_phase_one(&mut self, pivot_tol: f64) {
        if let Some(r) = self.basic.iter().position(|&v| v == ARTIFICIAL) {
            let best = (0..self.width)
                .filter(|&k| !self.frozen[k])
                .map(|k| (k, self.entry(r, k).abs()))
                .filter(|&(_, v)| v > pivot_tol)
                .fold(None, |best: Option<(usize, f64)>, (k, v)| match best {
                    Some((_, bv)) if bv >= v => best,
                    _ => Some((k, v)),
                });
            if let Some((k, _)) = best {
                self.pivot(r, k);
            }
        }
        if let Some(art) = self.artificial_column() {
            self.frozen[art] = true;
        }
    }

    /// Re-expresses `z = ⟨c, x⟩` in terms of the current nonbasic variables.
    pub fn set_objective(&mut self, c: &[f64]) {
        let n = self.n_struct;
        for (d, &v) in self.obj.iter_mut().zip(&self.nonbasic) {
            *d = if v < n { c[v] } else { 0.0 };
        }
        self.obj_value = 0.0;
        for i in 0..self.rows() {
            let v = self.basic[i];
            if v >= n || c[v] == 0.0 {
                continue;
            }
            let cv = c[v];
            self.obj_value += cv * self.rhs[i];
            let row = &self.a[i * self.width..(i + 1) * self.width];
            for (d, &a) in self.obj.iter_mut().zip(row) {
                *d -= cv * a;
            }
        }
        for (d, &f) in self.obj.iter_mut().zip(&self.frozen) {
            if f {
                *d = 0.0;
            }
        }
    }

    /// Appends `⟨coeffs, x⟩ ≤ bound` over the structural variables with a fresh
    /// basic slack. The new row may be primal infeasible.
    pub fn add_row(&mut self, coeffs: &[f64], bound: f64) {
        let n = self.n_struct;
        let w = self.width;
        let mut row: Vec<f64> = self
            .nonbasic
            .iter()
            .map(|&v| if v < n { coeffs[v] } else { 0.0 })
            .collect();
        let mut rhs = bound;
        for i in 0..self.rows() {
            let v = self.basic[i];
            if v >= n || coeffs[v] == 0.0 {
                continue;
            }
            let cv = coeffs[v];
            rhs -= cv * self.rhs[i];
            for (o, &a) in row.iter_mut().zip(&self.a[i * w..(i + 1) * w]) {
                *o -= cv * a;
            }
        }
        for (o, &f) in row.iter_mut().zip(&self.frozen) {
            if f {
                *o = 0.0;
            }
        }
        self.a.extend_from_slice(&row);
        self.rhs.push(rhs);
        self.basic.push(n + self.n_constraints);
        self.n_constraints += 1;
    }

    /// Replaces `g` by `g + delta` in the current dictionary. A basic slack
    /// absorbs its shift directly; a nonbasic slack spreads it through its column.
    pub fn shift_rhs(&mut self, delta: &[f64]) {
        let n = self.n_struct;
        let w = self.width;
        for (r, &v) in self.basic.iter().enumerate() {
            if v != ARTIFICIAL && v >= n {
                self.rhs[r] += delta[v - n];
            }
        }
        for (k, &v) in self.nonbasic.iter().enumerate() {
            if v == ARTIFICIAL || v < n || self.frozen[k] {
                continue;
            }
            let d = delta[v - n];
            if d == 0.0 {
                continue;
            }
            for (r, rhs) in self.rhs.iter_mut().enumerate() {
                *rhs += self.a[r * w + k] * d;
            }
            self.obj_value -= self.obj[k] * d;
        }
    }

    /// Deletes the constraints for which `drop(i)` holds. Only constraints
    /// whose slack is basic can go; their rows leave the dictionary unchanged
    /// otherwise. Remaining constraints are renumbered in order. Returns the
    /// number removed.
    pub fn drop_basic_slack_rows(&mut self, drop: impl Fn(usize) -> bool) -> usize {
        let n = self.n_struct;
        let w = self.width;
        let is_slack = |v: usize| v != ARTIFICIAL && v >= n;
        let removable: Vec<bool> = self.basic.iter().map(|&v| is_slack(v) && drop(v - n)).collect();
        let removed: Vec<usize> = self
            .basic
            .iter()
            .zip(&removable)
            .filter(|&(_, &r)| r)
            .map(|(&v, _)| v - n)
            .collect();
        if removed.is_empty() {
            return 0;
        }
        let mut gone = vec![false; self.n_constraints];
        for &i in &removed {
            gone[i] = true;
        }
        // new id of constraint i = i − (number of removed constraints before i)
        let mut shift = vec![0usize; self.n_constraints];
        let mut count = 0;
        for i in 0..self.n_constraints {
            shift[i] = count;
            if gone[i] {
                count += 1;
            }
        }
        let renumber = |v: usize| if is_slack(v) { v - shift[v - n] } else { v };

        let mut write = 0;
        for r in 0..self.rhs.len() {
            if removable[r] {
                continue;
            }
            if write != r {
                self.a.copy_within(r * w..(r + 1) * w, write * w);
                self.rhs[write] = self.rhs[r];
                self.basic[write] = self.basic[r];
            }
            write += 1;
        }
        self.a.truncate(write * w);
        self.rhs.truncate(write);
        self.basic.truncate(write);
        for v in self.basic.iter_mut().chain(self.nonbasic.iter_mut()) {
            *v = renumber(*v);
        }
        self.n_constraints -= removed.len();
        removed.len()
    }

    /// Structural values of the current basic solution.
    pub fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_struct];
        for (&v, &b) in self.basic.iter().zip(&self.rhs) {
            if v < self.n_struct {
                x[v] = b;
            }
        }
        x
    }

    /// Multipliers of the `≤` rows, read off the objective row.
    pub fn duals(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n_constraints];
        for (&v, &d) in self.nonbasic.iter().zip(&self.obj) {
            if v != ARTIFICIAL && v >= self.n_struct {
                y[v - self.n_struct] = -d;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> PivotRules {
        PivotRules {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-10,
            stall_threshold: 10,
            max_iterations: 1000,
            devex: false,
        }
    }

    #[test]
    fn pivot_matches_hand_computation() {
        // max 3x + 2y, x + y ≤ 4, x + 3y ≤ 6
        let rows: [&[f64]; 2] = [&[1.0, 1.0], &[1.0, 3.0]];
        let mut t = Tableau::new(&rows, &[4.0, 6.0], &[3.0, 2.0], false);
        t.pivot(0, 0);
        assert_eq!(t.basic, vec![0, 3]);
        assert_eq!(t.nonbasic, vec![2, 1]);
        assert_eq!(t.rhs, vec![4.0, 2.0]);
        assert_eq!(t.obj, vec![-3.0, -1.0]);
        assert_eq!(t.objective_value(), 12.0);
        assert_eq!(t.primal(), vec![4.0, 0.0]);
        assert_eq!(t.duals(), vec![3.0, 0.0]);
    }

    #[test]
    fn added_row_is_expressed_in_nonbasics() {
        let rows: [&[f64]; 2] = [&[1.0, 1.0], &[1.0, 3.0]];
        let mut t = Tableau::new(&rows, &[4.0, 6.0], &[3.0, 2.0], false);
        let mut it = 0;
        assert_eq!(t.primal_simplex(&rules(), &mut it), Ok(PrimalOutcome::Optimal));
        // x ≤ 1 cuts off (4, 0)
        t.add_row(&[1.0, 0.0], 1.0);
        assert_eq!(t.rhs[2], -3.0);
        assert_eq!(t.dual_simplex(&rules(), &mut it), Ok(DualOutcome::Feasible));
        assert_eq!(t.primal_simplex(&rules(), &mut it), Ok(PrimalOutcome::Optimal));
        let x = t.primal();
        // optimum moves to (1, 5/3): 3 + 10/3
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 5.0 / 3.0).abs() < 1e-12);
        assert!((t.objective_value() - (3.0 + 10.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn shifted_rhs_keeps_the_basis() {
        // optimal basis {x, y, s2}: x + y = 4, 2x + y = 7 gives (3, 1)
        let rows: [&[f64]; 3] = [&[1.0, 1.0], &[1.0, 3.0], &[2.0, 1.0]];
        let mut t = Tableau::new(&rows, &[4.0, 8.0, 7.0], &[3.0, 2.0], false);
        let mut it = 0;
        t.primal_simplex(&rules(), &mut it).unwrap();
        assert_eq!(t.primal(), vec![3.0, 1.0]);
        // x + y = 4.5, 2x + y = 7.25 gives (2.75, 1.75) and s2 = 7 − 8 = −1
        t.shift_rhs(&[0.5, -1.0, 0.25]);
        let x = t.primal();
        assert!((x[0] - 2.75).abs() < 1e-12 && (x[1] - 1.75).abs() < 1e-12);
        assert!((t.objective_value() - 11.75).abs() < 1e-12);
        let (_, worst) = t.min_rhs().unwrap();
        assert!((worst + 1.0).abs() < 1e-12);
    }

    #[test]
    fn dropping_an_inactive_row_keeps_the_rest() {
        // x + y ≤ 4, x + 3y ≤ 8 (inactive), 2x + y ≤ 7 at optimum (3, 1)
        let rows: [&[f64]; 3] = [&[1.0, 1.0], &[1.0, 3.0], &[2.0, 1.0]];
        let mut t = Tableau::new(&rows, &[4.0, 8.0, 7.0], &[3.0, 2.0], false);
        let mut it = 0;
        t.primal_simplex(&rules(), &mut it).unwrap();
        let duals = t.duals();
        assert_eq!(t.drop_basic_slack_rows(|i| i == 0), 0);
        assert_eq!(t.drop_basic_slack_rows(|i| i == 1), 1);
        assert_eq!(t.n_constraints(), 2);
        assert_eq!(t.rows(), 2);
        assert_eq!(t.primal(), vec![3.0, 1.0]);
        assert_eq!(t.duals(), vec![duals[0], duals[2]]);
        // the survivors keep working: tighten the old third row, now constraint 1
        t.shift_rhs(&[0.0, -1.0]);
        assert_eq!(t.dual_simplex(&rules(), &mut it), Ok(DualOutcome::Feasible));
        t.primal_simplex(&rules(), &mut it).unwrap();
        let x = t.primal();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
