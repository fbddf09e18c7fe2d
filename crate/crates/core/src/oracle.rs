//! Brute-force reference solvers. Every budget-feasible attack is evaluated
//! once by the exact recourse oracle; `Φ_F(w)` is then a maximum over the
//! attacks disjoint from `w` and `z*` a minimum over `W`.

use crate::error::{Error, Result};
use crate::model::{canonicalize, FortificationStrategy, Instance, InterdictionStrategy, Selection};
use crate::recourse::RecourseOracle;

/// Largest number of candidate sets either enumeration may visit.
pub const ENUMERATION_GUARD: u64 = 1 << 20;

/// Precomputed `Φ_I` over all budget-feasible attacks of one instance.
pub struct Oracle {
    canon: Instance,
    /// `(attack as bitmask, Φ_I in min form)`, masks in increasing
    /// lexicographic order of the 0-1 vector.
    attacks: Vec<(u64, i64)>,
}

impl Oracle {
    pub fn new(instance: &Instance) -> Result<Self> {
        let canon = canonicalize(instance)?;
        let n = canon.n();
        if n > 63 {
            return Err(Error::EnumerationGuard(u64::MAX));
        }
        let masks = budget_subsets(&canon.interdict_cost, canon.interdict_budget)?;
        let oracle = RecourseOracle::new(&canon);
        let mut attacks: Vec<(u64, i64)> = masks
            .into_iter()
            .map(|m| {
                let x: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
                (m, oracle.solve(&x).0)
            })
            .collect();
        attacks.sort_by_key(|&(m, _)| lex_key(m, n));
        Ok(Oracle { canon, attacks })
    }

    pub fn instance(&self) -> &Instance {
        &self.canon
    }

    /// `Φ_F(w)` in minimizing form with the lexicographically smallest
    /// maximizer.
    pub fn interdiction_min_form(&self, w: &Selection) -> (i64, InterdictionStrategy) {
        let wm = to_mask(w);
        let mut best: Option<(u64, i64)> = None;
        for &(m, v) in &self.attacks {
            if m & wm == 0 && best.is_none_or(|b| v > b.1) {
                best = Some((m, v));
            }
        }
        let (m, v) = best.expect("the empty attack is always feasible");
        (v, Selection::from_mask(self.canon.n(), m))
    }

    /// `Φ_F(w)` in the instance's reporting sense.
    pub fn interdiction(&self, w: &Selection) -> (i64, InterdictionStrategy) {
        let (v, x) = self.interdiction_min_form(w);
        (self.canon.report(v), x)
    }

    /// `z*` in minimizing form with the lexicographically smallest
    /// minimizer.
    pub fn fortification_min_form(&self) -> Result<(i64, FortificationStrategy)> {
        let n = self.canon.n();
        let mut ws = budget_subsets(&self.canon.fortify_cost, self.canon.fortify_budget)?;
        ws.sort_by_key(|&m| lex_key(m, n));
        let mut best: Option<(i64, u64)> = None;
        for m in ws {
            let v = self.interdiction_min_form(&Selection::from_mask(n, m)).0;
            if best.is_none_or(|b| v < b.0) {
                best = Some((v, m));
            }
        }
        let (v, m) = best.expect("w = 0 is always feasible");
        Ok((v, Selection::from_mask(n, m)))
    }

    pub fn fortification(&self) -> Result<(i64, FortificationStrategy)> {
        let (v, w) = self.fortification_min_form()?;
        Ok((self.canon.report(v), w))
    }

    /// All budget-feasible fortifications.
    pub fn fortifications(&self) -> Result<Vec<Selection>> {
        let n = self.canon.n();
        let mut ws = budget_subsets(&self.canon.fortify_cost, self.canon.fortify_budget)?;
        ws.sort_by_key(|&m| lex_key(m, n));
        Ok(ws.into_iter().map(|m| Selection::from_mask(n, m)).collect())
    }
}

/// `Φ_F(w)` and its lexicographically smallest maximizer, in the instance's
/// reporting sense.
pub fn bruteforce_interdiction(instance: &Instance, w: &Selection) -> Result<(i64, InterdictionStrategy)> {
    if w.len() != instance.n() {
        return Err(Error::Dimension {
            expected: instance.n(),
            got: w.len(),
        });
    }
    Ok(Oracle::new(instance)?.interdiction(w))
}

/// `z*` and its lexicographically smallest minimizer, in the instance's
/// reporting sense.
pub fn bruteforce_fortification(instance: &Instance) -> Result<(i64, FortificationStrategy)> {
    Oracle::new(instance)?.fortification()
}

/// Masks of all subsets with `Σ cost ≤ budget`, found by depth-first search
/// over the items sorted by increasing cost.
fn budget_subsets(cost: &[i64], budget: i64) -> Result<Vec<u64>> {
    let mut order: Vec<usize> = (0..cost.len()).filter(|&i| cost[i] <= budget).collect();
    order.sort_by_key(|&i| (cost[i], i));
    let mut out = Vec::new();
    let mut stack = vec![(0usize, 0u64, budget)];
    while let Some((start, mask, room)) = stack.pop() {
        out.push(mask);
        if out.len() as u64 > ENUMERATION_GUARD {
            return Err(Error::EnumerationGuard(ENUMERATION_GUARD));
        }
        for (k, &i) in order.iter().enumerate().skip(start) {
            if cost[i] > room {
                break;
            }
            stack.push((k + 1, mask | 1 << i, room - cost[i]));
        }
    }
    Ok(out)
}

fn to_mask(s: &Selection) -> u64 {
    s.iter_ones().fold(0, |m, i| m | 1 << i)
}

/// Sort key giving lexicographic order of the vector `(x_0, ..., x_{n-1})`.
fn lex_key(mask: u64, n: usize) -> u64 {
    (0..n).fold(0, |k, i| k << 1 | (mask >> i & 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_arc_example() {
        let sp = Instance::shortest_path(3, &[(0, 1, 1, 10), (1, 2, 2, 10), (0, 2, 5, 10)], 0, 2, 1, 2).unwrap();
        // by hand: x=0 -> 3, {s-a} -> 5, {s-t, s-a} -> 13, {s-t, a-t} -> 13
        let (v, x) = bruteforce_interdiction(&sp, &Selection::empty(3)).unwrap();
        assert_eq!(v, 13);
        assert_eq!(x.support(), vec![1, 2]);
        let all = Selection::from_support(3, &[0, 1, 2]);
        assert_eq!(bruteforce_interdiction(&sp, &all).unwrap().0, 3);
        let (z, w) = bruteforce_fortification(&sp).unwrap();
        assert_eq!(z, 5);
        assert_eq!(w.support(), vec![2]);
    }

    #[test]
    fn subsets_respect_budget() {
        let s = budget_subsets(&[1, 2, 3, 9], 3).unwrap();
        let mut s2 = s.clone();
        s2.sort();
        assert_eq!(s2, vec![0b0, 0b1, 0b10, 0b11, 0b100]);
        assert!(budget_subsets(&[0; 21], 0).is_err());
    }

    #[test]
    fn interdiction_value_is_monotone() {
        let kp = Instance::knapsack(vec![5, 4, 3, 6], vec![2, 2, 1, 3], 5, vec![1; 4], vec![1; 4], 2, 2).unwrap();
        let o = Oracle::new(&kp).unwrap();
        let ws = o.fortifications().unwrap();
        for a in &ws {
            for b in &ws {
                if a.is_subset_of(b) {
                    // more fortification can only help a maximizing defender
                    assert!(o.interdiction(a).0 <= o.interdiction(b).0);
                }
            }
        }
    }
}
