//! Tightening fortification cuts `θ ≥ Φ_I(x̂) - Σ coeff_i w_i`.
//!
//! Enumerative strengthening splits the value lost when a subset `P` of the
//! attack is fortified among the coefficients of `P`. Bound strengthening
//! caps every coefficient at `Φ_I(x̂) - z̲` for a lower bound `z̲`. The two
//! combine by taking the componentwise minimum. All values are in
//! minimizing form.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::master::{CutScope, FortificationCut, Strengthening};
use crate::model::{Instance, Selection};
use crate::recourse::RecourseOracle;

/// Caps on the subset enumeration.
#[derive(Debug, Clone, Copy)]
pub struct EnumLimits {
    pub max_support: usize,
    pub max_subsets: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_support: 20,
            max_subsets: 4096,
        }
    }
}

/// Caps every coefficient of `cut` at `(Φ_I(x̂) - z̲)⁺`. `None` leaves the cut
/// unchanged.
pub fn strengthen_lower_bound(cut: &FortificationCut, lower_bound: Option<i64>) -> FortificationCut {
    let Some(z) = lower_bound else {
        return cut.clone();
    };
    let cap = (cut.base_value - z).max(0);
    let mut out = cut.clone();
    for c in &mut out.coeffs {
        c.1 = c.1.min(cap);
    }
    out.strengthening = match cut.strengthening {
        Strengthening::Enum | Strengthening::Combined(_) => Strengthening::Combined(z),
        _ => Strengthening::Bound(z),
    };
    out
}

/// `min{(Φ_I(x̂) - z̲)⁺, d̃_i}` for every entry of `d_tilde`.
pub fn combine(d_tilde: &[i64], phi: i64, lower_bound: Option<i64>) -> Vec<i64> {
    match lower_bound {
        None => d_tilde.to_vec(),
        Some(z) => {
            let cap = (phi - z).max(0);
            d_tilde.iter().map(|&d| d.min(cap)).collect()
        }
    }
}

/// `true` once `counter` consecutive trials failed to tighten a cut.
pub fn adaptive_disable(counter: usize, limit: usize) -> bool {
    counter >= limit
}

/// Turns enumerative strengthening off after a run of fruitless trials.
#[derive(Debug, Clone)]
pub struct EnumerationGate {
    limit: usize,
    failures: usize,
    disabled: bool,
}

impl EnumerationGate {
    pub fn new(limit: usize) -> Self {
        EnumerationGate {
            limit,
            failures: 0,
            disabled: false,
        }
    }

    pub fn is_disabled(&self) -> bool {
        self.disabled
    }

    /// Records one trial and returns whether the feature is now off.
    pub fn record(&mut self, improved: bool) -> bool {
        if improved {
            self.failures = 0;
        } else {
            self.failures += 1;
        }
        if adaptive_disable(self.failures, self.limit) {
            self.disabled = true;
        }
        self.disabled
    }
}

/// Enumerative strengthening of the cut for `x_hat` (with `phi = Φ_I(x̂)`).
/// Returns one coefficient per asset; entries outside `S(x̂)` are zero.
pub fn strengthen_enumerative(instance: &Instance, x_hat: &Selection, phi: i64, seed: u64) -> Vec<i64> {
    let oracle = RecourseOracle::new(instance);
    let z0 = oracle.solve(&vec![false; instance.n()]).0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    enumerative_coefficients(instance, &oracle, x_hat, phi, z0, EnumLimits::default(), &mut rng)
}

pub(crate) fn enumerative_coefficients(
    instance: &Instance,
    oracle: &RecourseOracle,
    x_hat: &Selection,
    phi: i64,
    z0: i64,
    limits: EnumLimits,
    rng: &mut ChaCha8Rng,
) -> Vec<i64> {
    let n = instance.n();
    let d = &instance.penalty;
    let support = x_hat.support();
    let mut full = vec![0i64; n];
    for &i in &support {
        full[i] = d[i];
    }
    if support.is_empty() {
        return full;
    }
    if support.len() > limits.max_support {
        return full;
    }
    let Some(subsets) = affordable_subsets(
        &support,
        &instance.fortify_cost,
        instance.fortify_budget,
        limits.max_subsets,
    ) else {
        return full;
    };

    let mut dt = vec![0i64; n];
    let max_delta = phi - z0;
    let mut x_prime = x_hat.as_slice().to_vec();
    for p in &subsets {
        if oracle.cannot_coexist(p) {
            continue;
        }
        let sum_d: i64 = p.iter().map(|&i| d[i]).sum();
        let mut sum_dt: i64 = p.iter().map(|&i| dt[i]).sum();
        if sum_dt >= sum_d.min(max_delta) {
            continue;
        }
        for &i in p {
            x_prime[i] = false;
        }
        let lb = oracle.lower_bound(&x_prime);
        for &i in p {
            x_prime[i] = true;
        }
        let delta = (phi - lb).min(sum_d);
        let mut open: Vec<usize> = p.iter().copied().filter(|&i| dt[i] < d[i]).collect();
        while sum_dt < delta {
            let k = *open.choose(rng).expect("sum of d covers delta");
            let add = (d[k] - dt[k]).min(delta - sum_dt);
            dt[k] += add;
            sum_dt += add;
            if dt[k] == d[k] {
                open.retain(|&i| i != k);
            }
        }
        if support.iter().all(|&i| dt[i] == d[i]) {
            return dt;
        }
    }
    dt
}

/// Subsets of `support` with `Σ f ≤ budget`, by increasing size and then
/// lexicographically. `None` if there are more than `cap`.
fn affordable_subsets(support: &[usize], f: &[i64], budget: i64, cap: usize) -> Option<Vec<Vec<usize>>> {
    #[allow(clippy::too_many_arguments)]
    fn extend(
        support: &[usize],
        f: &[i64],
        room: i64,
        start: usize,
        want: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        if cur.len() == want {
            out.push(cur.clone());
            return out.len() <= cap;
        }
        for k in start..support.len() {
            let i = support[k];
            if f[i] <= room {
                cur.push(i);
                let ok = extend(support, f, room - f[i], k + 1, want, cur, out, cap);
                cur.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut out = Vec::new();
    for size in 1..=support.len() {
        let before = out.len();
        if !extend(support, f, budget, 0, size, &mut Vec::new(), &mut out, cap) {
            return None;
        }
        if out.len() == before {
            break;
        }
    }
    Some(out)
}

/// Builds a cut from `x_hat` with the given coefficient vector (indexed by
/// asset).
pub(crate) fn cut_with(
    x_hat: &Selection,
    phi: i64,
    coeffs: &[i64],
    scope: CutScope,
    strengthening: Strengthening,
) -> FortificationCut {
    FortificationCut {
        base_value: phi,
        coeffs: x_hat.iter_ones().map(|i| (i, coeffs[i])).collect(),
        source_x: x_hat.clone(),
        scope,
        strengthening,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonicalize;

    fn cut(phi: i64, coeffs: &[(usize, i64)]) -> FortificationCut {
        let n = coeffs.iter().map(|c| c.0 + 1).max().unwrap_or(0);
        FortificationCut {
            base_value: phi,
            coeffs: coeffs.to_vec(),
            source_x: Selection::from_support(n, &coeffs.iter().map(|c| c.0).collect::<Vec<_>>()),
            scope: CutScope::Global,
            strengthening: Strengthening::None,
        }
    }

    #[test]
    fn lower_bound_examples() {
        let c = cut(10, &[(0, 5), (1, 2), (2, 9)]);
        let s = strengthen_lower_bound(&c, Some(7));
        assert_eq!(s.coeffs, vec![(0, 3), (1, 2), (2, 3)]);
        assert_eq!(s.strengthening, Strengthening::Bound(7));
        let s = strengthen_lower_bound(&c, Some(12));
        assert!(s.coeffs.iter().all(|c| c.1 == 0));
        assert_eq!(strengthen_lower_bound(&c, None), c);
    }

    #[test]
    fn combine_examples() {
        assert_eq!(combine(&[4, 1], 9, Some(7)), vec![2, 1]);
        assert_eq!(combine(&[4, 1], 9, None), vec![4, 1]);
    }

    #[test]
    fn gate_counts_successive_failures() {
        let mut g = EnumerationGate::new(10);
        for _ in 0..8 {
            assert!(!g.record(false));
        }
        assert!(!g.record(true));
        for _ in 0..9 {
            assert!(!g.record(false));
        }
        assert!(g.record(false));
        assert!(g.is_disabled());
    }

    #[test]
    fn empty_attack_has_no_coefficients() {
        let sp = Instance::shortest_path(2, &[(0, 1, 3, 4)], 0, 1, 1, 1).unwrap();
        let d = strengthen_enumerative(&sp, &Selection::empty(1), 3, 0);
        assert_eq!(d, vec![0]);
    }

    #[test]
    fn shared_head_subsets_are_skipped() {
        // arcs 0 (s->t) and 1 (a->t) share the head t
        let sp = Instance::shortest_path(3, &[(0, 2, 1, 5), (1, 2, 1, 5), (0, 1, 1, 0)], 0, 2, 2, 2).unwrap();
        let o = RecourseOracle::new(&sp);
        assert!(o.cannot_coexist(&[0, 1]));
        let x = Selection::from_support(3, &[0, 1]);
        let phi = o.solve(x.as_slice()).0;
        assert_eq!(phi, 6);
        let d = strengthen_enumerative(&sp, &x, phi, 1);
        // fortifying either arc alone gives back a path of length 1 or 2
        assert!(d[0] >= 5 && d[1] >= 4 && d[0] <= 5 && d[1] <= 5);
    }

    #[test]
    fn subsets_in_cardinality_order() {
        let s = affordable_subsets(&[2, 5, 7], &[1; 8], 2, 100).unwrap();
        assert_eq!(s, vec![vec![2], vec![5], vec![7], vec![2, 5], vec![2, 7], vec![5, 7]]);
        assert!(affordable_subsets(&[0, 1, 2, 3], &[1; 4], 4, 5).is_none());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let k = Instance::knapsack(vec![6, 5, 4, 7], vec![3, 2, 1, 4], 6, vec![1; 4], vec![1; 4], 2, 3).unwrap();
        let k = canonicalize(&k).unwrap();
        let o = RecourseOracle::new(&k);
        let x = Selection::from_support(4, &[0, 1, 3]);
        let phi = o.solve(x.as_slice()).0;
        let a = strengthen_enumerative(&k, &x, phi, 42);
        let b = strengthen_enumerative(&k, &x, phi, 42);
        assert_eq!(a, b);
        assert!(a.iter().zip(&k.penalty).all(|(t, d)| 0 <= *t && t <= d));
    }
}
