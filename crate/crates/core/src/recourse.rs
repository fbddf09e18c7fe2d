//! Oracles for the innermost problem `Φ_I(x) = min_{y∈Y} c·y + Σ d_i x_i y_i`.
//!
//! The public functions take any instance and report values in its own
//! sense (maximum profit for a knapsack defender, path length for a
//! shortest-path defender). [`RecourseOracle`] is the min-form engine the
//! solver calls in its inner loops.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::model::{Instance, InterdictionStrategy, RecourseSpec, Selection, Sense};

pub type RecourseSolution = Selection;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecourseResult {
    pub value: i64,
    pub solution: RecourseSolution,
    pub is_exact: bool,
}

/// Above this many DP cells the knapsack is solved by branch-and-bound.
const DP_CELL_LIMIT: usize = 20_000_000;

/// Exact optimum of the recourse problem under interdiction `x`.
pub fn solve_recourse_exact(instance: &Instance, x: &InterdictionStrategy) -> RecourseResult {
    let oracle = RecourseOracle::new(instance);
    let (value, support) = oracle.solve(x.as_slice());
    RecourseResult {
        value: sense_value(instance, value),
        solution: Selection::from_support(instance.n(), &support),
        is_exact: true,
    }
}

/// Dantzig greedy for the knapsack recourse: scan items by decreasing
/// effective profit per unit weight and pack whatever fits.
///
/// # Panics
/// If the instance does not have a knapsack recourse.
pub fn solve_recourse_greedy(instance: &Instance, x: &InterdictionStrategy) -> RecourseResult {
    assert!(
        matches!(instance.recourse, RecourseSpec::Knapsack { .. }),
        "greedy recourse is defined for knapsack instances only"
    );
    let oracle = RecourseOracle::new(instance);
    let (value, support) = oracle.solve_greedy(x.as_slice());
    RecourseResult {
        value: sense_value(instance, value),
        solution: Selection::from_support(instance.n(), &support),
        is_exact: false,
    }
}

/// Cheap dual bound on the recourse value: the floor of the Dantzig
/// fractional bound for a knapsack (an upper bound on the profit), the exact
/// path length for a shortest path.
pub fn recourse_dual_bound(instance: &Instance, x: &InterdictionStrategy) -> i64 {
    let oracle = RecourseOracle::new(instance);
    sense_value(instance, oracle.lower_bound(x.as_slice()))
}

fn sense_value(instance: &Instance, min_form: i64) -> i64 {
    match instance.sense {
        Sense::Min => min_form,
        Sense::Max => -min_form,
    }
}

/// Min-form recourse engine shared by the solver components.
#[derive(Debug, Clone)]
pub struct RecourseOracle {
    costs: Vec<i64>,
    penalty: Vec<i64>,
    shape: Shape,
}

#[derive(Debug, Clone)]
enum Shape {
    Knapsack {
        weights: Vec<i64>,
        capacity: i64,
    },
    Network {
        nodes: usize,
        // outgoing arc indices per node, ascending
        out: Vec<Vec<usize>>,
        tails: Vec<usize>,
        heads: Vec<usize>,
        source: usize,
        sink: usize,
    },
}

impl RecourseOracle {
    pub fn new(instance: &Instance) -> Self {
        let shape = match &instance.recourse {
            RecourseSpec::Knapsack { weights, capacity } => Shape::Knapsack {
                weights: weights.clone(),
                capacity: *capacity,
            },
            RecourseSpec::ShortestPath {
                nodes,
                arcs,
                source,
                sink,
            } => {
                let mut out = vec![Vec::new(); *nodes];
                for (k, a) in arcs.iter().enumerate() {
                    out[a.tail].push(k);
                }
                Shape::Network {
                    nodes: *nodes,
                    out,
                    tails: arcs.iter().map(|a| a.tail).collect(),
                    heads: arcs.iter().map(|a| a.head).collect(),
                    source: *source,
                    sink: *sink,
                }
            }
        };
        RecourseOracle {
            costs: instance.min_form_costs(),
            penalty: instance.penalty.clone(),
            shape,
        }
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    /// Min-form cost of asset `i` under interdiction `x`.
    fn cost(&self, x: &[bool], i: usize) -> i64 {
        self.costs[i] + if x[i] { self.penalty[i] } else { 0 }
    }

    /// `c·y + Σ d_i x_i y_i` for a given recourse support.
    pub fn evaluate(&self, x: &[bool], support: &[usize]) -> i64 {
        support.iter().map(|&i| self.cost(x, i)).sum()
    }

    /// `c·y`.
    pub fn nominal_cost(&self, support: &[usize]) -> i64 {
        support.iter().map(|&i| self.costs[i]).sum()
    }

    pub fn costs(&self) -> &[i64] {
        &self.costs
    }

    pub fn penalty(&self) -> &[i64] {
        &self.penalty
    }

    /// Exact min-form `Φ_I(x)` with an optimal support.
    pub fn solve(&self, x: &[bool]) -> (i64, Vec<usize>) {
        match &self.shape {
            Shape::Knapsack { weights, capacity } => {
                let profits: Vec<i64> = (0..self.n()).map(|i| -self.cost(x, i)).collect();
                let (profit, support) = knapsack_exact(&profits, weights, *capacity);
                (-profit, support)
            }
            Shape::Network { .. } => {
                let (v, path) = self
                    .dijkstra(|i| self.cost(x, i))
                    .expect("instance validation guarantees an s-t path");
                (v, path)
            }
        }
    }

    /// Feasible (knapsack: greedy) recourse solution; exact for networks.
    pub fn solve_greedy(&self, x: &[bool]) -> (i64, Vec<usize>) {
        match &self.shape {
            Shape::Knapsack { weights, capacity } => {
                let profits: Vec<i64> = (0..self.n()).map(|i| -self.cost(x, i)).collect();
                let support = knapsack_greedy(&profits, weights, *capacity);
                let profit: i64 = support.iter().map(|&i| profits[i]).sum();
                (-profit, support)
            }
            Shape::Network { .. } => self.solve(x),
        }
    }

    /// Valid lower bound on min-form `Φ_I(x)`.
    pub fn lower_bound(&self, x: &[bool]) -> i64 {
        match &self.shape {
            Shape::Knapsack { weights, capacity } => {
                let profits: Vec<i64> = (0..self.n()).map(|i| -self.cost(x, i)).collect();
                -dantzig_bound(&profits, weights, *capacity)
            }
            Shape::Network { .. } => self.solve(x).0,
        }
    }

    /// Recourse solution for a fractional interdiction `x̄` with costs
    /// `c + d·x̄`: exact shortest path for networks, greedy for knapsacks.
    pub fn solve_fractional(&self, x: &[f64]) -> Vec<usize> {
        let cost = |i: usize| self.costs[i] as f64 + self.penalty[i] as f64 * x[i];
        match &self.shape {
            Shape::Knapsack { weights, capacity } => {
                let mut order: Vec<usize> = (0..self.n()).filter(|&i| -cost(i) > 1e-9).collect();
                order.sort_by(|&i, &j| {
                    // ratio_i > ratio_j first; zero weight goes first
                    let (pi, pj) = (-cost(i), -cost(j));
                    let lhs = pi * weights[j] as f64;
                    let rhs = pj * weights[i] as f64;
                    rhs.partial_cmp(&lhs).unwrap_or(Ordering::Equal).then(i.cmp(&j))
                });
                let mut room = *capacity;
                let mut support = Vec::new();
                for i in order {
                    if weights[i] <= room {
                        room -= weights[i];
                        support.push(i);
                    }
                }
                support.sort_unstable();
                support
            }
            Shape::Network { .. } => self
                .dijkstra_f64(cost)
                .expect("instance validation guarantees an s-t path"),
        }
    }

    /// Two assets can appear together in some recourse solution only if this
    /// returns `false`. Knapsack: the set does not fit. Network: two arcs of
    /// the set share a head or a tail.
    pub fn cannot_coexist(&self, set: &[usize]) -> bool {
        match &self.shape {
            Shape::Knapsack { weights, capacity } => set.iter().map(|&i| weights[i]).sum::<i64>() > *capacity,
            Shape::Network { tails, heads, .. } => {
                for (k, &a) in set.iter().enumerate() {
                    for &b in &set[k + 1..] {
                        if tails[a] == tails[b] || heads[a] == heads[b] {
                            return true;
                        }
                    }
                }
                false
            }
        }
    }

    fn dijkstra(&self, cost: impl Fn(usize) -> i64) -> Option<(i64, Vec<usize>)> {
        let Shape::Network {
            nodes,
            out,
            heads,
            tails,
            source,
            sink,
        } = &self.shape
        else {
            unreachable!()
        };
        let mut dist = vec![i64::MAX; *nodes];
        let mut pred = vec![usize::MAX; *nodes];
        let mut done = vec![false; *nodes];
        let mut heap = BinaryHeap::new();
        dist[*source] = 0;
        heap.push(Reverse((0i64, *source)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if done[u] || du > dist[u] {
                continue;
            }
            done[u] = true;
            if u == *sink {
                break;
            }
            for &a in &out[u] {
                let v = heads[a];
                if done[v] {
                    continue;
                }
                let nd = du + cost(a);
                if nd < dist[v] || (nd == dist[v] && a < pred[v]) {
                    if nd < dist[v] {
                        heap.push(Reverse((nd, v)));
                    }
                    dist[v] = nd;
                    pred[v] = a;
                }
            }
        }
        if dist[*sink] == i64::MAX {
            return None;
        }
        Some((dist[*sink], trace_path(&pred, tails, *source, *sink)))
    }

    fn dijkstra_f64(&self, cost: impl Fn(usize) -> f64) -> Option<Vec<usize>> {
        let Shape::Network {
            nodes,
            out,
            heads,
            tails,
            source,
            sink,
        } = &self.shape
        else {
            unreachable!()
        };
        let mut dist = vec![f64::INFINITY; *nodes];
        let mut pred = vec![usize::MAX; *nodes];
        let mut done = vec![false; *nodes];
        let mut heap = BinaryHeap::new();
        dist[*source] = 0.0;
        heap.push(Reverse((OrdF64(0.0), *source)));
        while let Some(Reverse((OrdF64(du), u))) = heap.pop() {
            if done[u] || du > dist[u] {
                continue;
            }
            done[u] = true;
            if u == *sink {
                break;
            }
            for &a in &out[u] {
                let v = heads[a];
                if done[v] {
                    continue;
                }
                let nd = du + cost(a);
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = a;
                    heap.push(Reverse((OrdF64(nd), v)));
                }
            }
        }
        if !dist[*sink].is_finite() {
            return None;
        }
        Some(trace_path(&pred, tails, *source, *sink))
    }
}

fn trace_path(pred: &[usize], tails: &[usize], source: usize, sink: usize) -> Vec<usize> {
    let mut path = Vec::new();
    let mut v = sink;
    while v != source {
        let a = pred[v];
        path.push(a);
        v = tails[a];
    }
    path.sort_unstable();
    path
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Items with positive profit, ordered by decreasing profit/weight (zero
/// weight first), ties to the lower index.
fn ratio_order(profits: &[i64], weights: &[i64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profits.len()).filter(|&i| profits[i] > 0).collect();
    order.sort_by(|&i, &j| {
        let lhs = profits[i] as i128 * weights[j] as i128;
        let rhs = profits[j] as i128 * weights[i] as i128;
        rhs.cmp(&lhs).then(i.cmp(&j))
    });
    order
}

fn knapsack_greedy(profits: &[i64], weights: &[i64], capacity: i64) -> Vec<usize> {
    let mut room = capacity;
    let mut support = Vec::new();
    for i in ratio_order(profits, weights) {
        if weights[i] <= room {
            room -= weights[i];
            support.push(i);
        }
    }
    support.sort_unstable();
    support
}

/// Floor of the LP-relaxation optimum of the knapsack.
fn dantzig_bound(profits: &[i64], weights: &[i64], capacity: i64) -> i64 {
    let mut room = capacity;
    let mut total: i64 = 0;
    for i in ratio_order(profits, weights) {
        if weights[i] <= room {
            room -= weights[i];
            total += profits[i];
        } else {
            total += (profits[i] as i128 * room as i128 / weights[i] as i128) as i64;
            break;
        }
    }
    total
}

/// Maximum-profit 0-1 knapsack. Returns the profit and the chosen items.
fn knapsack_exact(profits: &[i64], weights: &[i64], capacity: i64) -> (i64, Vec<usize>) {
    let items: Vec<usize> = (0..profits.len())
        .filter(|&i| profits[i] > 0 && weights[i] <= capacity)
        .collect();
    if items.is_empty() {
        return (0, Vec::new());
    }
    let cap = capacity as usize;
    if items.len().saturating_mul(cap + 1) <= DP_CELL_LIMIT {
        knapsack_dp(profits, weights, cap, &items)
    } else {
        knapsack_branch_and_bound(profits, weights, capacity, &items)
    }
}

fn knapsack_dp(profits: &[i64], weights: &[i64], cap: usize, items: &[usize]) -> (i64, Vec<usize>) {
    let width = cap + 1;
    let mut best = vec![0i64; width];
    let mut take = vec![false; items.len() * width];
    for (k, &i) in items.iter().enumerate() {
        let w = weights[i] as usize;
        let p = profits[i];
        for c in (w..=cap).rev() {
            let cand = best[c - w] + p;
            if cand > best[c] {
                best[c] = cand;
                take[k * width + c] = true;
            }
        }
    }
    let mut support = Vec::new();
    let mut c = cap;
    for (k, &i) in items.iter().enumerate().rev() {
        if take[k * width + c] {
            support.push(i);
            c -= weights[i] as usize;
        }
    }
    support.sort_unstable();
    (best[cap], support)
}

fn knapsack_branch_and_bound(profits: &[i64], weights: &[i64], capacity: i64, items: &[usize]) -> (i64, Vec<usize>) {
    let sub_p: Vec<i64> = items.iter().map(|&i| profits[i]).collect();
    let sub_w: Vec<i64> = items.iter().map(|&i| weights[i]).collect();
    let order = ratio_order(&sub_p, &sub_w);
    let p: Vec<i64> = order.iter().map(|&k| sub_p[k]).collect();
    let w: Vec<i64> = order.iter().map(|&k| sub_w[k]).collect();

    struct Search<'a> {
        p: &'a [i64],
        w: &'a [i64],
        best: i64,
        best_set: Vec<bool>,
        cur: Vec<bool>,
    }
    impl Search<'_> {
        fn bound(&self, k: usize, room: i64, profit: i64) -> i64 {
            let mut room = room;
            let mut total = profit;
            for j in k..self.p.len() {
                if self.w[j] <= room {
                    room -= self.w[j];
                    total += self.p[j];
                } else {
                    total += (self.p[j] as i128 * room as i128 / self.w[j] as i128) as i64;
                    break;
                }
            }
            total
        }
        fn dfs(&mut self, k: usize, room: i64, profit: i64) {
            if profit > self.best {
                self.best = profit;
                self.best_set.clone_from(&self.cur);
            }
            if k == self.p.len() || self.bound(k, room, profit) <= self.best {
                return;
            }
            if self.w[k] <= room {
                self.cur[k] = true;
                self.dfs(k + 1, room - self.w[k], profit + self.p[k]);
                self.cur[k] = false;
            }
            self.dfs(k + 1, room, profit);
        }
    }
    let mut s = Search {
        p: &p,
        w: &w,
        best: 0,
        best_set: vec![false; p.len()],
        cur: vec![false; p.len()],
    };
    s.dfs(0, capacity, 0);
    let mut support: Vec<usize> = s
        .best_set
        .iter()
        .enumerate()
        .filter(|(_, &t)| t)
        .map(|(k, _)| items[order[k]])
        .collect();
    support.sort_unstable();
    (s.best, support)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kfg(capacity: i64) -> Instance {
        Instance::knapsack(vec![6, 5, 4], vec![3, 2, 1], capacity, vec![1; 3], vec![1; 3], 1, 1).unwrap()
    }

    fn triangle() -> Instance {
        // s=0, a=1, t=2: s->a (1), a->t (2), s->t (5), delays 10
        Instance::shortest_path(3, &[(0, 1, 1, 10), (1, 2, 2, 10), (0, 2, 5, 10)], 0, 2, 1, 2).unwrap()
    }

    /// Exhaustive knapsack: every subset of the items.
    fn brute_knapsack(inst: &Instance, x: &Selection) -> i64 {
        let RecourseSpec::Knapsack { weights, capacity } = &inst.recourse else {
            unreachable!()
        };
        let n = inst.n();
        (0u64..1 << n)
            .filter(|m| (0..n).filter(|&i| m >> i & 1 == 1).map(|i| weights[i]).sum::<i64>() <= *capacity)
            .map(|m| {
                (0..n)
                    .filter(|&i| m >> i & 1 == 1)
                    .map(|i| {
                        if x[i] {
                            inst.nominal[i] - inst.penalty[i]
                        } else {
                            inst.nominal[i]
                        }
                    })
                    .sum::<i64>()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn knapsack_exact_examples() {
        let inst = kfg(4);
        let r = solve_recourse_exact(&inst, &Selection::empty(3));
        assert_eq!((r.value, r.solution.support()), (10, vec![0, 2]));
        assert_eq!(brute_knapsack(&inst, &Selection::empty(3)), 10);

        let x = Selection::from_support(3, &[0]);
        let r = solve_recourse_exact(&inst, &x);
        assert_eq!((r.value, r.solution.support()), (9, vec![1, 2]));
        assert_eq!(brute_knapsack(&inst, &x), 9);
    }

    #[test]
    fn knapsack_greedy_examples() {
        let inst = kfg(4);
        let r = solve_recourse_greedy(&inst, &Selection::empty(3));
        assert_eq!((r.value, r.solution.support()), (9, vec![1, 2]));
        assert!(!r.is_exact);
        assert_eq!(solve_recourse_greedy(&kfg(0), &Selection::empty(3)).value, 0);
        let all = Selection::from_support(3, &[0, 1, 2]);
        let r = solve_recourse_greedy(&inst, &all);
        assert_eq!((r.value, r.solution.count()), (0, 0));
    }

    #[test]
    fn dantzig_bound_examples() {
        let inst = kfg(4);
        assert_eq!(recourse_dual_bound(&inst, &Selection::empty(3)), 11);
        assert_eq!(recourse_dual_bound(&inst, &Selection::from_support(3, &[0, 1, 2])), 0);
    }

    #[test]
    fn shortest_path_examples() {
        let sp = triangle();
        let x = Selection::from_support(3, &[1]);
        let r = solve_recourse_exact(&sp, &x);
        assert_eq!((r.value, r.solution.support()), (5, vec![2]));
        assert_eq!(recourse_dual_bound(&sp, &x), 5);

        let single = Instance::shortest_path(2, &[(0, 1, 7, 3)], 0, 1, 1, 1).unwrap();
        assert_eq!(solve_recourse_exact(&single, &Selection::empty(1)).value, 7);
    }

    #[test]
    fn dijkstra_prefers_lower_arc_index_on_ties() {
        // two parallel arcs with equal cost
        let sp = Instance::shortest_path(2, &[(0, 1, 3, 1), (0, 1, 3, 1)], 0, 1, 1, 1).unwrap();
        let r = solve_recourse_exact(&sp, &Selection::empty(2));
        assert_eq!(r.solution.support(), vec![0]);
        let r = solve_recourse_exact(&sp, &Selection::from_support(2, &[0]));
        assert_eq!(r.solution.support(), vec![1]);
    }

    #[test]
    fn branch_and_bound_matches_dp() {
        let profits = [12, 7, 9, 3, 15, 4, 8, 6];
        let weights = [5, 3, 4, 1, 7, 2, 4, 3];
        let items: Vec<usize> = (0..8).collect();
        for cap in 0..30 {
            let dp = knapsack_dp(&profits, &weights, cap as usize, &items);
            let bb = knapsack_branch_and_bound(&profits, &weights, cap, &items);
            assert_eq!(dp.0, bb.0, "capacity {cap}");
            let w: i64 = bb.1.iter().map(|&i| weights[i]).sum();
            assert!(w <= cap);
        }
    }

    #[test]
    fn fractional_recourse() {
        let sp = triangle();
        let canon = crate::model::canonicalize(&sp).unwrap();
        let o = RecourseOracle::new(&canon);
        assert_eq!(o.solve_fractional(&[0.0, 0.0, 0.0]), vec![0, 1]);
        assert_eq!(o.solve_fractional(&[0.0, 0.5, 0.0]), vec![2]);
        let k = crate::model::canonicalize(&kfg(4)).unwrap();
        let o = RecourseOracle::new(&k);
        assert_eq!(o.solve_fractional(&[0.0; 3]), vec![1, 2]);
    }

    #[test]
    fn coexistence_rules() {
        let sp = triangle();
        let o = RecourseOracle::new(&sp);
        assert!(!o.cannot_coexist(&[0, 1]));
        assert!(o.cannot_coexist(&[0, 2])); // same tail
        assert!(o.cannot_coexist(&[1, 2])); // same head
        let k = RecourseOracle::new(&kfg(4));
        assert!(k.cannot_coexist(&[0, 1]));
        assert!(!k.cannot_coexist(&[0, 2]));
    }
}
