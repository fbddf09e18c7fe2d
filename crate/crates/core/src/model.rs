//! Problem data for 0-1 fortification games and the feasibility predicates of
//! the three decision levels.
//!
//! A game is `min_{w∈W} max_{x∈X(w)} min_{y∈Y} c·y + Σ d_i x_i y_i` where
//! `W = {w : f·w ≤ B_F}`, `X = {x : g·x ≤ B_I}` and `X(w) = X ∩ {x ≤ 1 - w}`.
//! Instances may be authored with a maximizing defender (knapsack recourse);
//! [`canonicalize`] turns those into the minimizing form used by the solver.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Direction of the defender's objective as authored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Min,
    Max,
}

/// Endpoints of a directed arc. Arc costs and delays live in the instance's
/// per-asset vectors, indexed by the arc's position in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkArc {
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecourseSpec {
    /// 0-1 knapsack over the assets. Item profits are the instance's nominal
    /// values; interdicting an item removes its profit.
    Knapsack { weights: Vec<i64>, capacity: i64 },
    /// Shortest `source`–`sink` path where every asset is an arc.
    ShortestPath {
        nodes: usize,
        arcs: Vec<NetworkArc>,
        source: usize,
        sink: usize,
    },
}

impl RecourseSpec {
    pub fn kind(&self) -> RecourseKind {
        match self {
            RecourseSpec::Knapsack { .. } => RecourseKind::Knapsack,
            RecourseSpec::ShortestPath { .. } => RecourseKind::ShortestPath,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecourseKind {
    Knapsack,
    ShortestPath,
}

impl fmt::Display for RecourseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecourseKind::Knapsack => f.write_str("kfg"),
            RecourseKind::ShortestPath => f.write_str("spfg"),
        }
    }
}

/// A fortification game. All numbers are integers in units of `1/scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub sense: Sense,
    /// Set when this is the min-form image of a maximizing instance; reported
    /// objective values are negated back.
    pub negated: bool,
    /// Common denominator of every numeric field.
    pub scale: i64,
    /// Nominal recourse cost (or profit, for a maximizing defender) per asset.
    pub nominal: Vec<i64>,
    /// Interdiction depreciation `d` per asset.
    pub penalty: Vec<i64>,
    pub fortify_cost: Vec<i64>,
    pub interdict_cost: Vec<i64>,
    pub fortify_budget: i64,
    pub interdict_budget: i64,
    pub recourse: RecourseSpec,
}

impl Instance {
    /// Knapsack fortification game: the defender maximizes the profit of a
    /// knapsack packed from non-interdicted items. `profits` doubles as the
    /// depreciation vector, so an interdicted item is worthless.
    #[allow(clippy::too_many_arguments)]
    pub fn knapsack(
        profits: Vec<i64>,
        weights: Vec<i64>,
        capacity: i64,
        fortify_cost: Vec<i64>,
        interdict_cost: Vec<i64>,
        fortify_budget: i64,
        interdict_budget: i64,
    ) -> Result<Self> {
        let inst = Instance {
            name: String::new(),
            sense: Sense::Max,
            negated: false,
            scale: 1,
            nominal: profits.clone(),
            penalty: profits,
            fortify_cost,
            interdict_cost,
            fortify_budget,
            interdict_budget,
            recourse: RecourseSpec::Knapsack { weights, capacity },
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Shortest-path fortification game with unit fortification and
    /// interdiction costs. Arcs are `(tail, head, cost, delay)`.
    pub fn shortest_path(
        nodes: usize,
        arcs: &[(usize, usize, i64, i64)],
        source: usize,
        sink: usize,
        fortify_budget: i64,
        interdict_budget: i64,
    ) -> Result<Self> {
        let m = arcs.len();
        let inst = Instance {
            name: String::new(),
            sense: Sense::Min,
            negated: false,
            scale: 1,
            nominal: arcs.iter().map(|a| a.2).collect(),
            penalty: arcs.iter().map(|a| a.3).collect(),
            fortify_cost: vec![1; m],
            interdict_cost: vec![1; m],
            fortify_budget,
            interdict_budget,
            recourse: RecourseSpec::ShortestPath {
                nodes,
                arcs: arcs
                    .iter()
                    .map(|&(tail, head, _, _)| NetworkArc { tail, head })
                    .collect(),
                source,
                sink,
            },
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_budgets(mut self, fortify_budget: i64, interdict_budget: i64) -> Result<Self> {
        self.fortify_budget = fortify_budget;
        self.interdict_budget = interdict_budget;
        self.validate()?;
        Ok(self)
    }

    pub fn with_level_costs(mut self, fortify_cost: Vec<i64>, interdict_cost: Vec<i64>) -> Result<Self> {
        self.fortify_cost = fortify_cost;
        self.interdict_cost = interdict_cost;
        self.validate()?;
        Ok(self)
    }

    /// Number of assets.
    pub fn n(&self) -> usize {
        self.nominal.len()
    }

    pub fn kind(&self) -> RecourseKind {
        self.recourse.kind()
    }

    /// Recourse cost vector of the minimizing form: `c` for a minimizing
    /// defender and `-profit` for a maximizing one.
    pub fn min_form_costs(&self) -> Vec<i64> {
        match self.sense {
            Sense::Min => self.nominal.clone(),
            Sense::Max => self.nominal.iter().map(|&c| -c).collect(),
        }
    }

    /// Converts a minimizing-form objective value into this instance's
    /// reporting sense.
    pub fn report(&self, min_form_value: i64) -> i64 {
        let v = match self.sense {
            Sense::Min => min_form_value,
            Sense::Max => -min_form_value,
        };
        if self.negated {
            -v
        } else {
            v
        }
    }

    /// Objective value as a real number (divides out the scale).
    pub fn to_real(&self, value: i64) -> f64 {
        value as f64 / self.scale as f64
    }

    /// Checks every structural invariant of the instance.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if n == 0 {
            return bad("instance has no assets".into());
        }
        if self.scale < 1 {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        for (name, v) in [
            ("penalty", &self.penalty),
            ("fortification cost", &self.fortify_cost),
            ("interdiction cost", &self.interdict_cost),
        ] {
            if v.len() != n {
                return bad(format!("{name} vector has length {}, expected {n}", v.len()));
            }
            if let Some(i) = v.iter().position(|&x| x < 0) {
                return bad(format!("{name} of asset {i} is negative"));
            }
        }
        // Canonical images of maximizing instances carry non-positive costs.
        let nominal_ok = if self.negated {
            self.nominal.iter().all(|&c| c <= 0)
        } else {
            self.nominal.iter().all(|&c| c >= 0)
        };
        if !nominal_ok {
            return bad("nominal cost has the wrong sign".into());
        }
        if self.fortify_budget < 0 || self.interdict_budget < 0 {
            return bad("budgets must be nonnegative".into());
        }
        match &self.recourse {
            RecourseSpec::Knapsack { weights, capacity } => {
                if weights.len() != n {
                    return bad(format!("weight vector has length {}, expected {n}", weights.len()));
                }
                if weights.iter().any(|&a| a < 0) || *capacity < 0 {
                    return bad("knapsack weights and capacity must be nonnegative".into());
                }
            }
            RecourseSpec::ShortestPath {
                nodes,
                arcs,
                source,
                sink,
            } => {
                if arcs.len() != n {
                    return bad(format!("arc list has length {}, expected {n}", arcs.len()));
                }
                if self.min_form_costs().iter().any(|&c| c < 0) {
                    return bad("shortest-path recourse needs a minimizing defender with nonnegative costs".into());
                }
                if source == sink {
                    return bad("source and sink coincide".into());
                }
                if *source >= *nodes || *sink >= *nodes {
                    return bad("source or sink out of range".into());
                }
                if let Some(a) = arcs.iter().find(|a| a.tail >= *nodes || a.head >= *nodes) {
                    return bad(format!("arc {}->{} references a missing node", a.tail, a.head));
                }
                if !reachable(*nodes, arcs, *source, *sink) {
                    return Err(Error::Disconnected {
                        source_node: *source,
                        sink: *sink,
                    });
                }
            }
        }
        Ok(())
    }

    /// `f·w ≤ B_F`.
    pub fn is_feasible_w(&self, w: &Selection) -> bool {
        w.len() == self.n() && w.weight(&self.fortify_cost) <= self.fortify_budget
    }

    /// `g·x ≤ B_I` and `x ≤ 1 - w`.
    pub fn is_feasible_x(&self, w: &Selection, x: &Selection) -> bool {
        x.len() == self.n()
            && w.len() == self.n()
            && x.weight(&self.interdict_cost) <= self.interdict_budget
            && x.iter_ones().all(|i| !w[i])
    }

    /// Budget check only (membership in `X`).
    pub fn is_feasible_attack(&self, x: &Selection) -> bool {
        x.len() == self.n() && x.weight(&self.interdict_cost) <= self.interdict_budget
    }
}

fn reachable(nodes: usize, arcs: &[NetworkArc], source: usize, sink: usize) -> bool {
    let mut out = vec![Vec::new(); nodes];
    for a in arcs {
        out[a.tail].push(a.head);
    }
    let mut seen = vec![false; nodes];
    let mut queue = VecDeque::from([source]);
    seen[source] = true;
    while let Some(u) = queue.pop_front() {
        if u == sink {
            return true;
        }
        for &v in &out[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    false
}

/// Returns the minimizing form of `instance`.
///
/// A maximizing defender is turned into a minimizing one by negating the
/// nominal values; the `negated` flag makes [`Instance::report`] give back
/// values in the authored sense. Minimizing instances are returned unchanged,
/// so applying this twice is the same as applying it once.
pub fn canonicalize(instance: &Instance) -> Result<Instance> {
    instance.validate()?;
    let mut out = instance.clone();
    if instance.sense == Sense::Max {
        out.sense = Sense::Min;
        out.negated = !instance.negated;
        out.nominal = instance.nominal.iter().map(|&c| -c).collect();
    }
    Ok(out)
}

/// A 0-1 vector over the assets: a fortification, an interdiction, or the
/// support of a recourse solution.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Selection(Vec<bool>);

pub type FortificationStrategy = Selection;
pub type InterdictionStrategy = Selection;

impl Selection {
    pub fn empty(n: usize) -> Self {
        Selection(vec![false; n])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Selection(bits)
    }

    pub fn from_support(n: usize, support: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &i in support {
            bits[i] = true;
        }
        Selection(bits)
    }

    /// Bit `i` of `mask` becomes asset `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Selection((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// `Σ weights_i` over the selected assets.
    pub fn weight(&self, weights: &[i64]) -> i64 {
        self.iter_ones().map(|i| weights[i]).sum()
    }

    /// Componentwise `self ≤ other`.
    pub fn is_subset_of(&self, other: &Selection) -> bool {
        self.0.iter().zip(&other.0).all(|(&a, &b)| !a || b)
    }

    /// Lexicographic order on the 0-1 vectors, first asset most significant.
    pub fn lex_less(&self, other: &Selection) -> bool {
        self.0 < other.0
    }
}

impl std::ops::Index<usize> for Selection {
    type Output = bool;
    fn index(&self, i: usize) -> &bool {
        &self.0[i]
    }
}

impl fmt::Debug for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter_ones().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kfg() -> Instance {
        Instance::knapsack(vec![6, 5, 4], vec![3, 2, 1], 4, vec![1; 3], vec![1; 3], 2, 1).unwrap()
    }

    #[test]
    fn canonicalize_flips_max_instances() {
        let k = kfg();
        let c = canonicalize(&k).unwrap();
        assert_eq!(c.sense, Sense::Min);
        assert!(c.negated);
        assert_eq!(c.nominal, vec![-6, -5, -4]);
        assert_eq!(c.penalty, vec![6, 5, 4]);
        assert_eq!(c.report(-10), 10);
        assert_eq!(canonicalize(&c).unwrap(), c);
    }

    #[test]
    fn canonicalize_keeps_min_instances() {
        let sp = Instance::shortest_path(2, &[(0, 1, 7, 3)], 0, 1, 1, 1).unwrap();
        assert_eq!(canonicalize(&sp).unwrap(), sp);
    }

    #[test]
    fn rejects_negative_data() {
        assert!(Instance::knapsack(vec![1], vec![1], 1, vec![-1], vec![1], 1, 1).is_err());
        assert!(Instance::knapsack(vec![1], vec![1], 1, vec![1], vec![1], -1, 1).is_err());
        assert!(Instance::knapsack(vec![1], vec![1], -1, vec![1], vec![1], 1, 1).is_err());
        assert!(Instance::shortest_path(2, &[(0, 1, 1, -2)], 0, 1, 1, 1).is_err());
    }

    #[test]
    fn rejects_disconnected_networks() {
        let err = Instance::shortest_path(3, &[(0, 1, 1, 1), (2, 1, 1, 1)], 0, 2, 1, 1).unwrap_err();
        assert!(matches!(err, Error::Disconnected { .. }));
        assert!(Instance::shortest_path(2, &[(0, 1, 1, 1)], 0, 0, 1, 1).is_err());
    }

    #[test]
    fn fortification_budget() {
        let inst = Instance::knapsack(vec![1; 3], vec![1; 3], 1, vec![1; 3], vec![1; 3], 2, 1).unwrap();
        assert!(inst.is_feasible_w(&Selection::from_support(3, &[0, 1])));
        assert!(!inst.is_feasible_w(&Selection::from_support(3, &[0, 1, 2])));
    }

    #[test]
    fn interdiction_linking_and_budget() {
        let inst = Instance::knapsack(vec![1; 2], vec![1; 2], 1, vec![1; 2], vec![1, 1], 1, 1).unwrap();
        let w = Selection::from_support(2, &[0]);
        assert!(!inst.is_feasible_x(&w, &Selection::from_support(2, &[0])));
        assert!(inst.is_feasible_x(&w, &Selection::from_support(2, &[1])));

        let inst = Instance::knapsack(vec![1; 2], vec![1; 2], 1, vec![1; 2], vec![2, 2], 1, 3).unwrap();
        assert!(!inst.is_feasible_x(&Selection::empty(2), &Selection::from_support(2, &[0, 1])));
    }

    #[test]
    fn selection_helpers() {
        let s = Selection::from_mask(4, 0b1010);
        assert_eq!(s.support(), vec![1, 3]);
        assert_eq!(format!("{s}"), "{1,3}");
        assert!(Selection::from_mask(4, 0b0010).is_subset_of(&s));
        assert!(!Selection::from_mask(4, 0b0001).lex_less(&Selection::from_mask(4, 0b0010)));
        assert!(Selection::from_mask(4, 0b0010).lex_less(&Selection::from_mask(4, 0b0001)));
    }
}
