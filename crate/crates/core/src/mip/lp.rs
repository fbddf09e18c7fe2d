//! Bounded-variable revised simplex on
//! `min c·x  s.t.  lo ≤ A x ≤ hi,  l ≤ x ≤ u`.
//!
//! Every row `i` gets a logical variable `s_i = a_i·x` carrying the row
//! bounds, so the equality system is `A x - s = 0` and the all-logical basis
//! is always available. The basis inverse is kept explicitly (dense, `m×m`)
//! and updated in product form; it is rebuilt from scratch every
//! [`REINVERT_EVERY`] pivots. Reoptimization after bound changes and row
//! additions runs the dual simplex from the previous basis. Dual degeneracy
//! is broken by shifting and perturbing costs; a primal phase then restores
//! the true costs, and also finishes off when a variable had to be parked at
//! an artificial bound.

// dense linear algebra reads best with explicit indices
#![allow(clippy::needless_range_loop)]

pub(crate) const FEAS_TOL: f64 = 1e-7;
const OPT_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REINVERT_EVERY: usize = 100;
const STALL_LIMIT: usize = 50;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpEngine {
    n: usize,
    m: usize,
    // structural columns as (row, value); rows as (column, value)
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    // working bounds: the true ones, possibly tightened by artificial boxes
    work_lo: Vec<f64>,
    work_up: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    pos: Vec<usize>,
    binv: Vec<f64>,
    updates: usize,
    iterations: usize,
    // costs saved while the dual phase runs on perturbed ones
    true_cost: Option<Vec<f64>>,
}

impl LpEngine {
    /// Problem with `costs.len()` structural variables and no rows.
    pub fn new(costs: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = costs.len();
        assert_eq!(lower.len(), n);
        assert_eq!(upper.len(), n);
        let x = (0..n).map(|j| initial_value(costs[j], lower[j], upper[j])).collect();
        LpEngine {
            n,
            m: 0,
            cols: vec![Vec::new(); n],
            rows: Vec::new(),
            work_lo: lower.clone(),
            work_up: upper.clone(),
            cost: costs,
            lower,
            upper,
            x,
            head: Vec::new(),
            pos: vec![NONE; n],
            binv: Vec::new(),
            updates: 0,
            iterations: 0,
            true_cost: None,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Total simplex iterations performed so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Appends the row `lo ≤ Σ coeffs ≤ hi` and returns its index. The new
    /// logical enters the basis, so the previous basis stays valid.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], lo: f64, hi: f64) -> usize {
        let i = self.m;
        let v = self.n + self.m;
        let mut row: Vec<(usize, f64)> = coeffs.iter().copied().filter(|&(_, a)| a != 0.0).collect();
        row.sort_by_key(|&(j, _)| j);
        for &(j, a) in &row {
            assert!(j < self.n, "row references column {j} of {}", self.n);
            self.cols[j].push((i, a));
        }
        // new inverse is [[B⁻¹, 0], [a_B B⁻¹, -1]]
        let m = self.m;
        let mut a_b = vec![0.0; m];
        for &(j, a) in &row {
            if self.pos[j] != NONE {
                a_b[self.pos[j]] = a;
            }
        }
        let mut binv = vec![0.0; (m + 1) * (m + 1)];
        for p in 0..m {
            binv[p * (m + 1)..p * (m + 1) + m].copy_from_slice(&self.binv[p * m..p * m + m]);
        }
        for (p, &ab) in a_b.iter().enumerate() {
            if ab != 0.0 {
                for k in 0..m {
                    binv[m * (m + 1) + k] += ab * self.binv[p * m + k];
                }
            }
        }
        binv[m * (m + 1) + m] = -1.0;
        self.binv = binv;

        let activity: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
        self.rows.push(row);
        self.cost.push(0.0);
        self.lower.push(lo);
        self.upper.push(hi);
        self.work_lo.push(lo);
        self.work_up.push(hi);
        self.x.push(activity);
        self.pos.push(m);
        self.head.push(v);
        self.m += 1;
        i
    }

    /// Removes the given rows. Indices of the remaining rows shift down.
    pub fn remove_rows(&mut self, rows: &[usize]) {
        let mut rows = rows.to_vec();
        rows.sort_unstable();
        rows.dedup();
        for &i in rows.iter().rev() {
            self.remove_row(i);
        }
    }

    fn remove_row(&mut self, i: usize) {
        assert!(i < self.m);
        let v = self.n + i;
        if self.pos[v] == NONE {
            // pivot the logical in; its column is -e_i, so B⁻¹ a_v = -B⁻¹ e_i
            let m = self.m;
            let mut alpha = vec![0.0; m];
            let mut best = NONE;
            let mut best_abs = 0.0;
            for p in 0..m {
                alpha[p] = -self.binv[p * m + i];
                if alpha[p].abs() > best_abs {
                    best_abs = alpha[p].abs();
                    best = p;
                }
            }
            let leaving = self.head[best];
            self.pivot(best, v, &alpha);
            self.x[leaving] = self.x[leaving].clamp(self.work_lo[leaving], self.work_up[leaving]);
        }
        // with the logical basic at position p, drop row p and column i of B⁻¹
        let p = self.pos[v];
        let m = self.m;
        let mut binv = Vec::with_capacity((m - 1) * (m - 1));
        for r in 0..m {
            if r == p {
                continue;
            }
            for k in 0..m {
                if k != i {
                    binv.push(self.binv[r * m + k]);
                }
            }
        }
        self.binv = binv;
        self.head.remove(p);
        for row in &self.rows[i] {
            let col = &mut self.cols[row.0];
            col.retain(|&(r, _)| r != i);
        }
        for col in &mut self.cols {
            for e in col.iter_mut() {
                if e.0 > i {
                    e.0 -= 1;
                }
            }
        }
        self.rows.remove(i);
        for vec in [
            &mut self.cost,
            &mut self.lower,
            &mut self.upper,
            &mut self.work_lo,
            &mut self.work_up,
            &mut self.x,
        ] {
            vec.remove(v);
        }
        self.pos.remove(v);
        for h in &mut self.head {
            if *h > v {
                *h -= 1;
            }
        }
        for (q, &h) in self.head.iter().enumerate() {
            self.pos[h] = q;
        }
        self.m -= 1;
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Changes the bounds of structural variable `j`.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        assert!(j < self.n);
        if self.pos[j] == NONE {
            let prev = self.x[j];
            self.x[j] = if prev == self.lower[j] && lo.is_finite() {
                lo
            } else if prev == self.upper[j] && hi.is_finite() {
                hi
            } else {
                prev.clamp(lo, hi)
            };
        }
        self.lower[j] = lo;
        self.upper[j] = hi;
        self.work_lo[j] = lo;
        self.work_up[j] = hi;
    }

    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    /// Reduced costs of the structural variables at the current basis.
    pub fn reduced_costs(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n + self.m];
        self.reduced_costs_into(&mut d);
        d.truncate(self.n);
        d
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// Solves the current problem, warm-starting from the last basis.
    pub fn solve(&mut self) -> LpStatus {
        self.solve_with_limit(20 * (self.n + self.m) + 5_000)
    }

    /// Like [`solve`](Self::solve), giving up after `limit` iterations.
    pub fn solve_with_limit(&mut self, limit: usize) -> LpStatus {
        let start = self.iterations;
        for j in 0..self.n + self.m {
            self.work_lo[j] = self.lower[j];
            self.work_up[j] = self.upper[j];
        }
        if self.updates >= REINVERT_EVERY {
            self.reinvert();
        }
        let dual = self.dual_phase(start + limit);
        let perturbed = match self.true_cost.take() {
            Some(cost) => {
                self.cost = cost;
                true
            }
            None => false,
        };
        if dual != LpStatus::Optimal {
            return dual;
        }
        let boxed = (0..self.n + self.m).any(|j| self.work_lo[j] != self.lower[j] || self.work_up[j] != self.upper[j]);
        if !boxed && !perturbed {
            return LpStatus::Optimal;
        }
        for j in 0..self.n + self.m {
            self.work_lo[j] = self.lower[j];
            self.work_up[j] = self.upper[j];
        }
        self.primal_phase(start + limit)
    }

    fn dual_phase(&mut self, limit: usize) -> LpStatus {
        let total = self.n + self.m;
        let mut d = vec![0.0; total];
        let mut stall = 0usize;
        let mut bland = false;
        let mut perturbed = false;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if self.updates >= REINVERT_EVERY {
                self.reinvert();
            }
            self.reduced_costs_into(&mut d);
            self.make_dual_feasible(&d);
            self.compute_basics();

            // leaving row: largest bound violation
            let mut r = NONE;
            let mut worst = FEAS_TOL;
            for p in 0..self.m {
                let b = self.head[p];
                let viol = (self.work_lo[b] - self.x[b]).max(self.x[b] - self.work_up[b]);
                if viol > FEAS_TOL {
                    if bland {
                        if r == NONE || b < self.head[r] {
                            r = p;
                        }
                    } else if viol > worst {
                        worst = viol;
                        r = p;
                    }
                }
            }
            if r == NONE {
                return LpStatus::Optimal;
            }
            let b = self.head[r];
            let to_lower = self.x[b] < self.work_lo[b];
            let sigma = if to_lower { 1.0 } else { -1.0 };
            let alpha_r = self.pivot_row(r);

            // Harris ratio test over the dual step
            let mut max_step = f64::INFINITY;
            let mut eligible = Vec::new();
            for j in 0..total {
                if self.pos[j] != NONE {
                    continue;
                }
                let a = sigma * alpha_r[j];
                let up = self.x[j] < self.work_up[j];
                let down = self.x[j] > self.work_lo[j];
                if (up && a < -PIVOT_TOL) || (down && a > PIVOT_TOL) {
                    let slack = if a < 0.0 { d[j] } else { -d[j] };
                    max_step = max_step.min((slack + OPT_TOL) / a.abs());
                    eligible.push((j, slack.max(0.0) / a.abs(), a.abs()));
                }
            }
            if eligible.is_empty() {
                return LpStatus::Infeasible;
            }
            let mut q = NONE;
            let mut step = 0.0;
            if bland {
                let min_ratio = eligible.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
                for &(j, ratio, _) in &eligible {
                    if ratio <= min_ratio + 1e-12 && (q == NONE || j < q) {
                        q = j;
                        step = ratio;
                    }
                }
            } else {
                let mut best = 0.0;
                for &(j, ratio, mag) in &eligible {
                    if ratio <= max_step && mag > best {
                        best = mag;
                        q = j;
                        step = ratio;
                    }
                }
            }
            // Harris may pick a column whose reduced cost is slightly on the
            // wrong side; shift its cost to zero it so the dual objective
            // never moves backwards
            if (sigma * alpha_r[q] < 0.0 && d[q] < 0.0) || (sigma * alpha_r[q] > 0.0 && d[q] > 0.0) {
                self.true_cost.get_or_insert_with(|| self.cost.clone());
                self.cost[q] -= d[q];
            }
            let alpha_q = self.pivot_column(q);
            self.pivot(r, q, &alpha_q);
            self.x[b] = if to_lower { self.work_lo[b] } else { self.work_up[b] };
            self.iterations += 1;
            if step < 1e-12 {
                stall += 1;
                if stall > STALL_LIMIT {
                    if perturbed {
                        bland = true;
                    } else {
                        self.perturb_costs();
                        perturbed = true;
                        stall = 0;
                    }
                }
            } else {
                stall = 0;
            }
        }
    }

    /// Widens the dual slack of every nonbasic column by a small,
    /// column-dependent amount to break dual degeneracy. The true costs are
    /// restored after the dual phase and a primal pass cleans up.
    fn perturb_costs(&mut self) {
        self.true_cost.get_or_insert_with(|| self.cost.clone());
        for j in 0..self.n + self.m {
            if self.pos[j] != NONE || self.work_lo[j] == self.work_up[j] {
                continue;
            }
            // Knuth's multiplicative hash spreads the magnitudes over [1, 2)
            let spread = 1.0 + f64::from((j as u32).wrapping_mul(2_654_435_761) >> 22) / 1024.0;
            let delta = 1e-6 * spread * (1.0 + self.cost[j].abs());
            if self.x[j] <= self.work_lo[j] {
                self.cost[j] += delta;
            } else if self.x[j] >= self.work_up[j] {
                self.cost[j] -= delta;
            }
        }
    }

    /// Moves nonbasic variables to the bound their reduced cost asks for,
    /// parking them at an artificial bound when that side is infinite.
    fn make_dual_feasible(&mut self, d: &[f64]) {
        for j in 0..self.n + self.m {
            if self.pos[j] != NONE || self.work_lo[j] == self.work_up[j] {
                continue;
            }
            if d[j] < -OPT_TOL && self.x[j] < self.work_up[j] {
                if !self.work_up[j].is_finite() {
                    self.work_up[j] = artificial(self.x[j], self.work_lo[j], 1.0);
                }
                self.x[j] = self.work_up[j];
            } else if d[j] > OPT_TOL && self.x[j] > self.work_lo[j] {
                if !self.work_lo[j].is_finite() {
                    self.work_lo[j] = artificial(self.x[j], self.work_up[j], -1.0);
                }
                self.x[j] = self.work_lo[j];
            }
        }
    }

    fn primal_phase(&mut self, limit: usize) -> LpStatus {
        let total = self.n + self.m;
        let mut d = vec![0.0; total];
        let mut stall = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if self.updates >= REINVERT_EVERY {
                self.reinvert();
            }
            self.compute_basics();
            self.reduced_costs_into(&mut d);
            let mut q = NONE;
            let mut best = OPT_TOL;
            for j in 0..total {
                if self.pos[j] != NONE {
                    continue;
                }
                let wants =
                    (d[j] < -OPT_TOL && self.x[j] < self.work_up[j]) || (d[j] > OPT_TOL && self.x[j] > self.work_lo[j]);
                if !wants {
                    continue;
                }
                if bland {
                    q = j;
                    break;
                }
                if d[j].abs() > best {
                    best = d[j].abs();
                    q = j;
                }
            }
            if q == NONE {
                return LpStatus::Optimal;
            }
            let dir = if d[q] < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.pivot_column(q);
            let mut step = if dir > 0.0 {
                self.work_up[q] - self.x[q]
            } else {
                self.x[q] - self.work_lo[q]
            };
            let mut r = NONE;
            let mut r_rate = 0.0;
            for p in 0..self.m {
                let rate = -dir * alpha[p];
                let b = self.head[p];
                let lim = if rate > PIVOT_TOL && self.work_up[b].is_finite() {
                    (self.work_up[b] - self.x[b]) / rate
                } else if rate < -PIVOT_TOL && self.work_lo[b].is_finite() {
                    (self.x[b] - self.work_lo[b]) / -rate
                } else {
                    continue;
                };
                let lim = lim.max(0.0);
                let better = if bland {
                    lim < step - 1e-12 || (lim <= step + 1e-12 && r != NONE && b < self.head[r])
                } else {
                    lim < step - 1e-12 || (lim <= step + 1e-12 && rate.abs() > r_rate)
                };
                if better || (r == NONE && lim <= step) {
                    step = lim;
                    r = p;
                    r_rate = rate.abs();
                }
            }
            if !step.is_finite() {
                return LpStatus::Unbounded;
            }
            self.iterations += 1;
            if step < 1e-12 {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
            }
            if r == NONE {
                self.x[q] += dir * step;
                continue;
            }
            let b = self.head[r];
            let rate = -dir * alpha[r];
            self.pivot(r, q, &alpha);
            self.x[b] = if rate > 0.0 { self.work_up[b] } else { self.work_lo[b] };
        }
    }

    /// `x_B = B⁻¹ (-N x_N)`.
    fn compute_basics(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.n {
            if self.pos[j] == NONE && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    rhs[i] -= a * self.x[j];
                }
            }
        }
        for (i, r) in rhs.iter_mut().enumerate() {
            if self.pos[self.n + i] == NONE {
                *r += self.x[self.n + i];
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.head[p]] = v;
        }
    }

    fn reduced_costs_into(&self, d: &mut [f64]) {
        let m = self.m;
        let mut y = vec![0.0; m];
        for p in 0..m {
            let c = self.cost[self.head[p]];
            if c != 0.0 {
                for (k, yk) in y.iter_mut().enumerate() {
                    *yk += c * self.binv[p * m + k];
                }
            }
        }
        for j in 0..self.n {
            d[j] = if self.pos[j] != NONE {
                0.0
            } else {
                self.cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
            };
        }
        for i in 0..m {
            let v = self.n + i;
            d[v] = if self.pos[v] != NONE { 0.0 } else { self.cost[v] + y[i] };
        }
    }

    /// Row `r` of `B⁻¹ [A | -I]`.
    fn pivot_row(&self, r: usize) -> Vec<f64> {
        let m = self.m;
        let rho = &self.binv[r * m..(r + 1) * m];
        let mut alpha = vec![0.0; self.n + m];
        for j in 0..self.n {
            if self.pos[j] == NONE {
                alpha[j] = self.cols[j].iter().map(|&(i, a)| rho[i] * a).sum();
            }
        }
        for i in 0..m {
            alpha[self.n + i] = -rho[i];
        }
        alpha
    }

    /// `B⁻¹ a_q`.
    fn pivot_column(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        if q < self.n {
            for &(i, a) in &self.cols[q] {
                for (p, al) in alpha.iter_mut().enumerate() {
                    *al += self.binv[p * m + i] * a;
                }
            }
        } else {
            let i = q - self.n;
            for (p, al) in alpha.iter_mut().enumerate() {
                *al = -self.binv[p * m + i];
            }
        }
        alpha
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for v in pivot_row.iter_mut() {
            *v /= piv;
        }
        for (p, &f) in alpha.iter().enumerate() {
            if p == r || f == 0.0 {
                continue;
            }
            let row = if p < r {
                &mut before[p * m..(p + 1) * m]
            } else {
                &mut after[(p - r - 1) * m..(p - r) * m]
            };
            for (v, &pr) in row.iter_mut().zip(pivot_row.iter()) {
                *v -= f * pr;
            }
        }
        self.pos[self.head[r]] = NONE;
        self.head[r] = q;
        self.pos[q] = r;
        self.updates += 1;
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination. Basic columns found to be
    /// dependent are swapped for logicals of uncovered rows.
    fn reinvert(&mut self) {
        let m = self.m;
        loop {
            let mut a = vec![0.0; m * 2 * m];
            let w = 2 * m;
            for (p, &b) in self.head.iter().enumerate() {
                if b < self.n {
                    for &(i, v) in &self.cols[b] {
                        a[i * w + p] = v;
                    }
                } else {
                    a[(b - self.n) * w + p] = -1.0;
                }
            }
            for i in 0..m {
                a[i * w + m + i] = 1.0;
            }
            let mut row_used = vec![false; m];
            let mut pivot_of = vec![NONE; m];
            let mut dependent = Vec::new();
            for p in 0..m {
                let mut best = NONE;
                let mut best_abs = SINGULAR_TOL;
                for i in 0..m {
                    if !row_used[i] && a[i * w + p].abs() > best_abs {
                        best_abs = a[i * w + p].abs();
                        best = i;
                    }
                }
                if best == NONE {
                    dependent.push(p);
                    continue;
                }
                row_used[best] = true;
                pivot_of[p] = best;
                let piv = a[best * w + p];
                for k in 0..w {
                    a[best * w + k] /= piv;
                }
                for i in 0..m {
                    if i != best {
                        let f = a[i * w + p];
                        if f != 0.0 {
                            for k in 0..w {
                                a[i * w + k] -= f * a[best * w + k];
                            }
                        }
                    }
                }
            }
            if dependent.is_empty() {
                let mut binv = vec![0.0; m * m];
                for p in 0..m {
                    let src = pivot_of[p];
                    binv[p * m..(p + 1) * m].copy_from_slice(&a[src * w + m..src * w + 2 * m]);
                }
                self.binv = binv;
                self.updates = 0;
                return;
            }
            let free_rows: Vec<usize> = (0..m)
                .filter(|&i| !row_used[i] && self.pos[self.n + i] == NONE)
                .collect();
            assert!(free_rows.len() >= dependent.len(), "basis repair ran out of logicals");
            for (&p, &i) in dependent.iter().zip(&free_rows) {
                let old = self.head[p];
                self.pos[old] = NONE;
                self.x[old] = self.x[old].clamp(self.work_lo[old], self.work_up[old]);
                self.head[p] = self.n + i;
                self.pos[self.n + i] = p;
            }
        }
    }
}

fn initial_value(cost: f64, lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            if cost < 0.0 {
                hi
            } else {
                lo
            }
        }
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

/// An artificial bound on the infinite side of a variable.
fn artificial(current: f64, other: f64, dir: f64) -> f64 {
    let anchor = if other.is_finite() { other } else { current };
    anchor + dir * 1e7_f64.max(1e3 * anchor.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(costs: &[f64], lo: &[f64], hi: &[f64]) -> LpEngine {
        LpEngine::new(costs.to_vec(), lo.to_vec(), hi.to_vec())
    }

    #[test]
    fn single_bounded_free_variable() {
        // max t s.t. t ≤ 5 with t free
        let mut e = lp(&[-1.0], &[-f64::INFINITY], &[f64::INFINITY]);
        e.add_row(&[(0, 1.0)], -f64::INFINITY, 5.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.values()[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn one_row_simplex() {
        // max x1 + x2 s.t. x1 + x2 ≤ 1, 0 ≤ x ≤ 1
        let mut e = lp(&[-1.0, -1.0], &[0.0, 0.0], &[1.0, 1.0]);
        e.add_row(&[(0, 1.0), (1, 1.0)], -f64::INFINITY, 1.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows() {
        let mut e = lp(&[-1.0], &[-f64::INFINITY], &[f64::INFINITY]);
        e.add_row(&[(0, 1.0)], -f64::INFINITY, 3.0);
        e.add_row(&[(0, 1.0)], 4.0, f64::INFINITY);
        assert_eq!(e.solve(), LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let mut e = lp(&[-1.0, 0.0], &[0.0, 0.0], &[f64::INFINITY, 1.0]);
        e.add_row(&[(0, 1.0), (1, -1.0)], 0.0, f64::INFINITY);
        assert_eq!(e.solve(), LpStatus::Unbounded);
        let mut e = lp(&[-1.0], &[0.0], &[f64::INFINITY]);
        assert_eq!(e.solve(), LpStatus::Unbounded);
    }

    #[test]
    fn warm_start_after_bounds_and_rows() {
        // min -3x - 2y s.t. x + y ≤ 4, x + 3y ≤ 6, x ≤ 3
        let mut e = lp(&[-3.0, -2.0], &[0.0, 0.0], &[3.0, f64::INFINITY]);
        e.add_row(&[(0, 1.0), (1, 1.0)], -f64::INFINITY, 4.0);
        e.add_row(&[(0, 1.0), (1, 3.0)], -f64::INFINITY, 6.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 11.0).abs() < 1e-9);
        e.set_bounds(0, 0.0, 1.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 6.333333333).abs() < 1e-6);
        let r = e.add_row(&[(1, 1.0)], -f64::INFINITY, 1.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 5.0).abs() < 1e-9);
        e.remove_rows(&[r]);
        e.set_bounds(0, 0.0, 3.0);
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 11.0).abs() < 1e-9);
        assert_eq!(e.num_rows(), 2);
    }

    /// Vertex enumeration for tiny LPs with finite variable bounds.
    fn brute_lp(c: &[f64], lo: &[f64], hi: &[f64], rows: &[(Vec<f64>, f64, f64)]) -> Option<f64> {
        let n = c.len();
        // candidate hyperplanes: a·x = v
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            planes.push((e.clone(), lo[j]));
            planes.push((e, hi[j]));
        }
        for (a, l, h) in rows {
            if l.is_finite() {
                planes.push((a.clone(), *l));
            }
            if h.is_finite() {
                planes.push((a.clone(), *h));
            }
        }
        let k = planes.len();
        let mut best: Option<f64> = None;
        let mut idx = vec![0usize; n];
        fn rec(start: usize, depth: usize, idx: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
            if depth == idx.len() {
                f(idx);
                return;
            }
            for s in start..k {
                idx[depth] = s;
                rec(s + 1, depth + 1, idx, k, f);
            }
        }
        rec(0, 0, &mut idx, k, &mut |sel: &[usize]| {
            // Gaussian elimination on the n×n system
            let mut a: Vec<Vec<f64>> = sel
                .iter()
                .map(|&s| {
                    let mut r = planes[s].0.clone();
                    r.push(planes[s].1);
                    r
                })
                .collect();
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                    .unwrap();
                if a[piv][col].abs() < 1e-9 {
                    return;
                }
                a.swap(col, piv);
                for r in 0..n {
                    if r != col {
                        let f = a[r][col] / a[col][col];
                        for cc in col..=n {
                            a[r][cc] -= f * a[col][cc];
                        }
                    }
                }
            }
            let x: Vec<f64> = (0..n).map(|j| a[j][n] / a[j][j]).collect();
            let ok = (0..n).all(|j| x[j] >= lo[j] - 1e-7 && x[j] <= hi[j] + 1e-7)
                && rows.iter().all(|(r, l, h)| {
                    let v: f64 = r.iter().zip(&x).map(|(p, q)| p * q).sum();
                    v >= l - 1e-7 && v <= h + 1e-7
                });
            if ok {
                let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        });
        best
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..300 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(0..=4);
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
            let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=0) as f64).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0..=4) as f64).collect();
            let rows: Vec<(Vec<f64>, f64, f64)> = (0..m)
                .map(|_| {
                    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
                    let centre = rng.gen_range(-4..=4) as f64;
                    match rng.gen_range(0..3) {
                        0 => (a, -f64::INFINITY, centre),
                        1 => (a, centre, f64::INFINITY),
                        _ => (a, centre, centre + rng.gen_range(0..=3) as f64),
                    }
                })
                .collect();
            let mut e = lp(&c, &lo, &hi);
            for (a, l, h) in &rows {
                let coeffs: Vec<(usize, f64)> = a.iter().copied().enumerate().collect();
                e.add_row(&coeffs, *l, *h);
            }
            let status = e.solve();
            match brute_lp(&c, &lo, &hi, &rows) {
                None => assert_eq!(status, LpStatus::Infeasible, "trial {trial}"),
                Some(v) => {
                    assert_eq!(status, LpStatus::Optimal, "trial {trial}");
                    assert!(
                        (e.objective() - v).abs() < 1e-6,
                        "trial {trial}: {} vs {v}",
                        e.objective()
                    );
                }
            }
        }
    }

    #[test]
    fn random_warm_starts_match_cold_solves() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = 6;
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-9..=9) as f64).collect();
            let mut warm = lp(&c, &vec![0.0; n], &vec![1.0; n]);
            let mut rows = Vec::new();
            for step in 0..8 {
                let a: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-4..=4) as f64)).collect();
                let hi = rng.gen_range(0..=6) as f64;
                rows.push((a.clone(), hi));
                warm.add_row(&a, -f64::INFINITY, hi);
                if step % 3 == 2 {
                    let j = rng.gen_range(0..n);
                    let v = rng.gen_range(0..=1) as f64;
                    warm.set_bounds(j, v, v);
                }
                if step == 5 {
                    warm.remove_rows(&[1]);
                    rows.remove(1);
                }
                let sw = warm.solve();
                let mut cold = lp(&c, &vec![0.0; n], &vec![1.0; n]);
                for j in 0..n {
                    let (l, u) = warm.bounds(j);
                    cold.set_bounds(j, l, u);
                }
                for (a, hi) in &rows {
                    cold.add_row(a, -f64::INFINITY, *hi);
                }
                let sc = cold.solve();
                assert_eq!(sw, sc);
                if sw == LpStatus::Optimal {
                    assert!((warm.objective() - cold.objective()).abs() < 1e-6);
                }
            }
        }
    }

    /// A separation relaxation from a 10x10 grid game on which plain Harris
    /// plus Bland cycled. Reference optimum from HiGHS.
    #[test]
    fn dual_degenerate_relaxation() {
        let text = include_str!("testdata/degenerate.lp");
        let mut lines = text.lines();
        let n: usize = lines.next().unwrap().parse().unwrap();
        let (mut c, mut lo, mut hi) = (vec![], vec![], vec![]);
        for _ in 0..n {
            let v: Vec<f64> = lines.next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
            c.push(v[0]);
            lo.push(v[1]);
            hi.push(v[2]);
        }
        let mut e = LpEngine::new(c, lo, hi);
        for line in lines {
            let mut it = line.split(' ');
            let a: f64 = it.next().unwrap().parse().unwrap();
            let b: f64 = it.next().unwrap().parse().unwrap();
            let coeffs: Vec<(usize, f64)> = it
                .map(|t| {
                    let (j, v) = t.split_once(':').unwrap();
                    (j.parse().unwrap(), v.parse().unwrap())
                })
                .collect();
            e.add_row(&coeffs, a, b);
        }
        assert_eq!(e.solve(), LpStatus::Optimal);
        assert!((e.objective() + 58.123_880_597_014_9).abs() < 1e-6, "{}", e.objective());
    }
}
