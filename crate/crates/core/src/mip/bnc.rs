use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::lp::{LpEngine, LpStatus};
use super::{MipModel, ObjSense, Row, INTEGRALITY_TOL};

const PRUNE_TOL: f64 = 1e-6;
const ROW_VIOLATION_TOL: f64 = 1e-6;
const ROOT_SEPARATION_ROUNDS: usize = 25;
const NODE_SEPARATION_ROUNDS: usize = 5;
// pseudocosts count as reliable after this many observations per direction
const RELIABILITY: usize = 2;
const STRONG_CANDIDATES: usize = 8;
const STRONG_ITERATIONS: usize = 100;

#[derive(Debug, Clone)]
pub struct MipControls {
    /// Only solutions strictly better than this value are of interest; nodes
    /// that cannot beat it are pruned.
    pub lower_cutoff: Option<f64>,
    /// Stop after this many incumbents better than the cutoff.
    pub solution_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// The fractional callback runs at the root and then every this many
    /// nodes.
    pub separation_frequency: usize,
    pub branching: Branching,
    pub node_selection: NodeSelection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branching {
    /// Closest to one half, ties to the lowest index.
    #[default]
    MostFractional,
    /// Product of the estimated down and up gains from observed pseudocosts.
    Pseudocost,
    /// Pseudocosts, with candidates lacking enough observations probed by a
    /// few dual simplex iterations on each child.
    Reliability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeSelection {
    /// Smallest bound first, deeper nodes breaking ties.
    #[default]
    BestBound,
    DepthFirst,
}

impl Default for MipControls {
    fn default() -> Self {
        MipControls {
            lower_cutoff: None,
            solution_limit: None,
            time_limit: None,
            node_limit: None,
            separation_frequency: 10,
            branching: Branching::default(),
            node_selection: NodeSelection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    /// No solution better than the lower cutoff exists.
    CutoffInfeasible,
    SolutionLimit,
    NodeLimit,
    TimeLimit,
    Interrupted,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct MipResult {
    pub status: MipStatus,
    pub incumbent: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Best bound in the model's sense.
    pub bound: f64,
    pub root_bound: Option<f64>,
    pub nodes: usize,
    pub accepted_solutions: usize,
    pub lp_iterations: usize,
}

/// What the search knows when it calls back.
#[derive(Debug, Clone)]
pub struct NodeContext<'a> {
    pub node_id: usize,
    pub depth: usize,
    /// LP objective of the current relaxation (model sense).
    pub node_bound: f64,
    /// Best bound over the whole tree (model sense).
    pub global_bound: f64,
    pub incumbent: Option<f64>,
    /// Branching decisions leading to this node.
    pub fixings: &'a [(usize, bool)],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutRow {
    pub row: Row,
    /// Valid only in the subtree of the node where it was generated.
    pub local: bool,
}

impl CutRow {
    pub fn global(row: Row) -> Self {
        CutRow { row, local: false }
    }

    pub fn local(row: Row) -> Self {
        CutRow { row, local: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateVerdict {
    /// The point is feasible. `objective` overrides the LP value.
    Accept { objective: Option<f64> },
    /// The point is cut off by `rows`. `post` optionally hands the search a
    /// feasible solution found along the way.
    Reject {
        rows: Vec<CutRow>,
        post: Option<(Vec<f64>, f64)>,
    },
}

pub trait MipCallbacks {
    /// Called at every LP optimum that is integral in the integer variables.
    fn on_integer(&mut self, _ctx: &NodeContext<'_>, _x: &[f64]) -> CandidateVerdict {
        CandidateVerdict::Accept { objective: None }
    }

    /// Called at fractional LP optima; returned rows are added if violated.
    fn on_fractional(&mut self, _ctx: &NodeContext<'_>, _x: &[f64]) -> Vec<CutRow> {
        Vec::new()
    }

    fn should_terminate(&mut self) -> bool {
        false
    }
}

pub struct NoCallbacks;

impl MipCallbacks for NoCallbacks {}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    fixings: Vec<(usize, bool)>,
    local_rows: Vec<usize>,
    origin: Option<Origin>,
}

/// The branching step that created a node, for pseudocost updates.
#[derive(Debug, Clone, Copy)]
struct Origin {
    var: usize,
    up: bool,
    // distance the branch moved the variable
    dist: f64,
    parent_obj: f64,
}

/// Per-variable objective gain per unit change, summed, with counts.
#[derive(Debug, Clone, Copy, Default)]
struct Pseudocost {
    sum: [f64; 2],
    count: [usize; 2],
}

impl Pseudocost {
    fn record(&mut self, up: bool, unit_gain: f64) {
        self.sum[up as usize] += unit_gain;
        self.count[up as usize] += 1;
    }

    fn reliable(&self) -> bool {
        self.count.iter().all(|&c| c >= RELIABILITY)
    }

    fn estimate(&self, up: bool, fallback: f64) -> f64 {
        let k = up as usize;
        if self.count[k] == 0 {
            fallback
        } else {
            self.sum[k] / self.count[k] as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OpenKey {
    bound: f64,
    depth: usize,
    id: usize,
    slot: usize,
    depth_first: bool,
}

impl Eq for OpenKey {}

impl Ord for OpenKey {
    // BinaryHeap pops the maximum: smallest bound, then deepest, then oldest;
    // depth first puts depth ahead of the bound and takes the newest
    fn cmp(&self, other: &Self) -> Ordering {
        let by_bound = other.bound.total_cmp(&self.bound);
        if self.depth_first {
            self.depth.cmp(&other.depth).then(by_bound).then(self.id.cmp(&other.id))
        } else {
            by_bound.then(self.depth.cmp(&other.depth)).then(other.id.cmp(&self.id))
        }
    }
}

impl PartialOrd for OpenKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowRef {
    Global(usize),
    Local(usize),
}

enum NodeOutcome {
    Fathomed,
    Branch {
        var: usize,
        // the LP value and the branching variable's value there
        obj: f64,
        value: f64,
        // lower bounds for the down and up child
        bounds: [f64; 2],
        local_rows: Vec<usize>,
        // reduced-cost fixings valid for both children
        implied: Vec<(usize, bool)>,
    },
    Stop(MipStatus),
}

struct Search<'m, 'c> {
    model: &'m MipModel,
    controls: &'m MipControls,
    callbacks: &'c mut dyn MipCallbacks,
    sign: f64,
    lp: LpEngine,
    // what each engine row is, in engine order
    loaded: Vec<RowRef>,
    global_rows: Vec<Row>,
    local_store: Vec<Row>,
    bounds: Vec<(f64, f64)>,
    open: BinaryHeap<OpenKey>,
    slots: Vec<Option<Node>>,
    next_id: usize,
    // objective values below are all in minimizing form
    incumbent: Option<(Vec<f64>, f64)>,
    accepted: usize,
    cutoff_pruned: bool,
    global_bound: f64,
    root_bound: Option<f64>,
    nodes: usize,
    iterations_before: usize,
    pseudo: Vec<Pseudocost>,
    start: Instant,
}

/// Solves `model` by LP-based branch-and-cut.
pub fn branch_and_cut(model: &MipModel, controls: &MipControls, callbacks: &mut dyn MipCallbacks) -> MipResult {
    if let Some(s) = controls.solution_limit {
        assert!(s >= 1, "solution limit must be at least 1");
    }
    let sign = match model.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    let mut search = Search {
        model,
        controls,
        callbacks,
        sign,
        lp: model.engine(),
        loaded: (0..model.rows.len()).map(RowRef::Global).collect(),
        global_rows: model.rows.clone(),
        local_store: Vec::new(),
        bounds: model.variables.iter().map(|v| (v.lower, v.upper)).collect(),
        open: BinaryHeap::new(),
        slots: Vec::new(),
        next_id: 1,
        incumbent: None,
        accepted: 0,
        cutoff_pruned: false,
        global_bound: -f64::INFINITY,
        root_bound: None,
        nodes: 0,
        iterations_before: 0,
        pseudo: vec![Pseudocost::default(); model.num_vars()],
        start: Instant::now(),
    };
    let status = search.run();
    search.finish(status)
}

impl Search<'_, '_> {
    fn run(&mut self) -> MipStatus {
        self.push(Node {
            id: 0,
            depth: 0,
            bound: -f64::INFINITY,
            fixings: Vec::new(),
            local_rows: Vec::new(),
            origin: None,
        });
        while let Some(key) = self.open.pop() {
            let node = self.slots[key.slot].take().expect("open node");
            if self.prunable(node.bound) {
                continue;
            }
            let limit_hit = if self.controls.node_limit.is_some_and(|l| self.nodes >= l) {
                Some(MipStatus::NodeLimit)
            } else if self.out_of_time() {
                Some(MipStatus::TimeLimit)
            } else if self.callbacks.should_terminate() {
                Some(MipStatus::Interrupted)
            } else {
                None
            };
            if let Some(status) = limit_hit {
                self.push(node);
                return status;
            }
            self.nodes += 1;
            match self.process(&node) {
                NodeOutcome::Fathomed => {}
                NodeOutcome::Branch {
                    var,
                    obj,
                    value,
                    bounds,
                    local_rows,
                    implied,
                } => {
                    for up in [false, true] {
                        let mut fixings = node.fixings.clone();
                        fixings.extend_from_slice(&implied);
                        fixings.push((var, up));
                        let dist = if up {
                            value.ceil() - value
                        } else {
                            value - value.floor()
                        };
                        let id = self.next_id;
                        self.next_id += 1;
                        self.push(Node {
                            id,
                            depth: node.depth + 1,
                            bound: bounds[up as usize],
                            fixings,
                            local_rows: local_rows.clone(),
                            origin: (dist > INTEGRALITY_TOL).then_some(Origin {
                                var,
                                up,
                                dist,
                                parent_obj: obj,
                            }),
                        });
                    }
                }
                NodeOutcome::Stop(status) => return status,
            }
        }
        if self.incumbent.is_some() {
            MipStatus::Optimal
        } else if self.cutoff_pruned {
            MipStatus::CutoffInfeasible
        } else {
            MipStatus::Infeasible
        }
    }

    fn process(&mut self, node: &Node) -> NodeOutcome {
        self.load(node);
        let is_root = node.id == 0;
        let mut local_rows = node.local_rows.clone();
        let separate_here = is_root || self.nodes.is_multiple_of(self.controls.separation_frequency.max(1));
        let max_rounds = if is_root {
            ROOT_SEPARATION_ROUNDS
        } else {
            NODE_SEPARATION_ROUNDS
        };
        let mut rounds = 0;
        loop {
            if self.out_of_time() {
                return self.interrupt(node, MipStatus::TimeLimit);
            }
            match self.solve_lp() {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return NodeOutcome::Fathomed,
                LpStatus::Unbounded => return NodeOutcome::Stop(MipStatus::Unbounded),
                LpStatus::IterationLimit => panic!("simplex iteration limit reached twice at node {}", node.id),
            }
            let obj = self.lp.objective();
            if is_root {
                self.root_bound = Some(obj);
            }
            if rounds == 0 {
                if let Some(o) = node.origin {
                    self.pseudo[o.var].record(o.up, (obj - o.parent_obj).max(0.0) / o.dist);
                }
            }
            if self.prunable(obj) {
                return NodeOutcome::Fathomed;
            }
            let x = self.lp.values().to_vec();
            let fractional = self.any_fractional(&x);
            let global = self.current_global_bound(obj);
            let ctx = NodeContext {
                node_id: node.id,
                depth: node.depth,
                node_bound: self.sign * obj,
                global_bound: self.sign * global,
                incumbent: self.incumbent.as_ref().map(|(_, v)| self.sign * v),
                fixings: &node.fixings,
            };
            if fractional {
                if separate_here && rounds < max_rounds {
                    rounds += 1;
                    let cuts = self.callbacks.on_fractional(&ctx, &x);
                    if self.add_cuts(cuts, &x, &mut local_rows) > 0 {
                        continue;
                    }
                }
                let (var, bounds) = self.select_branching(&x, obj);
                return self.branch(var, obj, x[var], bounds, local_rows);
            }
            match self.callbacks.on_integer(&ctx, &x) {
                CandidateVerdict::Accept { objective } => {
                    let value = match objective {
                        Some(v) => self.sign * v,
                        None if self.model.integral_objective => obj.round(),
                        None => obj,
                    };
                    if let Some(status) = self.offer(x, value) {
                        return NodeOutcome::Stop(status);
                    }
                    if value <= obj + PRUNE_TOL {
                        return NodeOutcome::Fathomed;
                    }
                    return self.branch_on_free(obj, local_rows);
                }
                CandidateVerdict::Reject { rows, post } => {
                    if let Some((px, pv)) = post {
                        if let Some(status) = self.offer(px, self.sign * pv) {
                            return NodeOutcome::Stop(status);
                        }
                    }
                    if self.add_cuts(rows, &x, &mut local_rows) > 0 {
                        continue;
                    }
                    return self.branch_on_free(obj, local_rows);
                }
            }
        }
    }

    /// Puts an interrupted node back so its bound is reported.
    fn interrupt(&mut self, node: &Node, status: MipStatus) -> NodeOutcome {
        self.push(node.clone());
        NodeOutcome::Stop(status)
    }

    /// Branches on the first integer variable that is not fixed yet, or
    /// fathoms when there is none.
    fn branch_on_free(&mut self, obj: f64, local_rows: Vec<usize>) -> NodeOutcome {
        let free = (0..self.model.num_vars())
            .find(|&j| self.model.variables[j].integer && self.bounds[j].0 < self.bounds[j].1);
        match free {
            Some(var) => {
                let value = self.lp.values()[var];
                self.branch(var, obj, value, [obj; 2], local_rows)
            }
            None => NodeOutcome::Fathomed,
        }
    }

    fn branch(&mut self, var: usize, obj: f64, value: f64, bounds: [f64; 2], local_rows: Vec<usize>) -> NodeOutcome {
        let implied = self.reduced_cost_fixings(obj, var);
        NodeOutcome::Branch {
            var,
            obj,
            value,
            bounds,
            local_rows,
            implied,
        }
    }

    /// Free binaries whose reduced cost alone lifts the LP bound past the
    /// pruning threshold, paired with the only value still worth exploring.
    fn reduced_cost_fixings(&mut self, obj: f64, skip: usize) -> Vec<(usize, bool)> {
        let (Some(target), by_cutoff) = self.prune_target() else {
            return Vec::new();
        };
        let d = self.lp.reduced_costs();
        let x = self.lp.values();
        let mut fixed = Vec::new();
        for (j, v) in self.model.variables.iter().enumerate() {
            let (lo, hi) = self.bounds[j];
            if !v.integer || j == skip || lo != 0.0 || hi != 1.0 {
                continue;
            }
            if x[j] == 0.0 && obj + d[j] > target {
                fixed.push((j, false));
            } else if x[j] == 1.0 && obj - d[j] > target {
                fixed.push((j, true));
            }
        }
        if by_cutoff && !fixed.is_empty() {
            self.cutoff_pruned = true;
        }
        fixed
    }

    fn any_fractional(&self, x: &[f64]) -> bool {
        (0..x.len()).any(|j| self.model.variables[j].integer && is_fractional(x[j]))
    }

    /// Picks the branching variable by the configured rule. Returns it with
    /// lower bounds for its down and up child.
    fn select_branching(&mut self, x: &[f64], obj: f64) -> (usize, [f64; 2]) {
        let mut candidates: Vec<usize> = (0..x.len())
            .filter(|&j| self.model.variables[j].integer && is_fractional(x[j]))
            .collect();
        // closest to one half first, so probing starts with the likeliest
        candidates.sort_by(|&a, &b| {
            let fa = (x[a] - x[a].floor() - 0.5).abs();
            let fb = (x[b] - x[b].floor() - 0.5).abs();
            fa.total_cmp(&fb).then(a.cmp(&b))
        });
        if self.controls.branching == Branching::MostFractional {
            return (candidates[0], [obj; 2]);
        }
        let (mut total, mut seen) = (0.0, 0usize);
        for p in &self.pseudo {
            for k in 0..2 {
                total += p.sum[k];
                seen += p.count[k];
            }
        }
        let fallback = if seen > 0 { total / seen as f64 } else { 1.0 };

        let mut best = (candidates[0], f64::NEG_INFINITY, [obj; 2]);
        let mut probed = 0;
        for &j in &candidates {
            let down = x[j] - x[j].floor();
            let up = x[j].ceil() - x[j];
            let mut bounds = [obj; 2];
            let probe_it = self.controls.branching == Branching::Reliability
                && !self.pseudo[j].reliable()
                && probed < STRONG_CANDIDATES;
            let gains = if probe_it {
                probed += 1;
                let mut gains = [0.0; 2];
                for (k, (lo, hi)) in [(self.bounds[j].0, x[j].floor()), (x[j].ceil(), self.bounds[j].1)]
                    .into_iter()
                    .enumerate()
                {
                    let dist = if k == 0 { down } else { up };
                    let mut probe = self.lp.clone();
                    probe.set_bounds(j, lo, hi);
                    gains[k] = match probe.solve_with_limit(STRONG_ITERATIONS) {
                        LpStatus::Optimal => {
                            let child = probe.objective().max(obj);
                            bounds[k] = child;
                            self.pseudo[j].record(k == 1, (child - obj) / dist);
                            child - obj
                        }
                        LpStatus::Infeasible => {
                            bounds[k] = f64::INFINITY;
                            f64::INFINITY
                        }
                        _ => self.pseudo[j].estimate(k == 1, fallback) * dist,
                    };
                }
                gains
            } else {
                [
                    self.pseudo[j].estimate(false, fallback) * down,
                    self.pseudo[j].estimate(true, fallback) * up,
                ]
            };
            let score = gains[0].max(1e-6) * gains[1].max(1e-6);
            if score > best.1 {
                best = (j, score, bounds);
            }
        }
        (best.0, best.2)
    }

    fn add_cuts(&mut self, cuts: Vec<CutRow>, x: &[f64], local_rows: &mut Vec<usize>) -> usize {
        let mut added = 0;
        for cut in cuts {
            if cut.row.violation(x) <= ROW_VIOLATION_TOL {
                continue;
            }
            self.lp.add_row(&cut.row.coeffs, cut.row.lower, cut.row.upper);
            if cut.local {
                local_rows.push(self.local_store.len());
                self.loaded.push(RowRef::Local(self.local_store.len()));
                self.local_store.push(cut.row);
            } else {
                self.loaded.push(RowRef::Global(self.global_rows.len()));
                self.global_rows.push(cut.row);
            }
            added += 1;
        }
        added
    }

    /// Records a solution; returns a status when the solution limit is hit.
    fn offer(&mut self, x: Vec<f64>, value: f64) -> Option<MipStatus> {
        if let Some(c) = self.cutoff_min() {
            let beats = if self.model.integral_objective {
                value <= (c - 1e-9).ceil() - 1.0 + PRUNE_TOL
            } else {
                value < c - 1e-9
            };
            if !beats {
                return None;
            }
        }
        if self.incumbent.as_ref().is_some_and(|(_, v)| value >= *v - 1e-9) {
            return None;
        }
        self.incumbent = Some((x, value));
        self.accepted += 1;
        match self.controls.solution_limit {
            Some(limit) if self.accepted >= limit => Some(MipStatus::SolutionLimit),
            _ => None,
        }
    }

    fn cutoff_min(&self) -> Option<f64> {
        self.controls.lower_cutoff.map(|c| self.sign * c)
    }

    fn prunable(&mut self, bound: f64) -> bool {
        match self.prune_target() {
            (Some(target), by_cutoff) if bound > target => {
                if by_cutoff {
                    self.cutoff_pruned = true;
                }
                true
            }
            _ => false,
        }
    }

    /// Bound above which a subtree cannot hold a useful solution, and
    /// whether the cutoff (rather than the incumbent) sets it.
    fn prune_target(&self) -> (Option<f64>, bool) {
        let integral = self.model.integral_objective;
        let by_incumbent = self.incumbent.as_ref().map(|(_, inc)| {
            if integral {
                inc - 1.0 + PRUNE_TOL
            } else {
                inc - PRUNE_TOL * inc.abs().max(1.0)
            }
        });
        let by_cutoff = self.cutoff_min().map(|c| {
            if integral {
                (c - 1e-9).ceil() - 1.0 + PRUNE_TOL
            } else {
                c - 1e-9
            }
        });
        match (by_incumbent, by_cutoff) {
            (Some(a), Some(b)) if b < a => (Some(b), true),
            (Some(a), _) => (Some(a), false),
            (None, b) => (b, b.is_some()),
        }
    }

    fn current_global_bound(&mut self, node_obj: f64) -> f64 {
        let mut b = node_obj;
        if let Some(top) = self.open.peek() {
            b = b.min(top.bound);
        }
        if let Some((_, inc)) = &self.incumbent {
            b = b.min(*inc);
        }
        self.global_bound = self.global_bound.max(b);
        self.global_bound
    }

    fn push(&mut self, node: Node) {
        let key = OpenKey {
            bound: node.bound,
            depth: node.depth,
            id: node.id,
            slot: self.slots.len(),
            depth_first: self.controls.node_selection == NodeSelection::DepthFirst,
        };
        self.slots.push(Some(node));
        self.open.push(key);
    }

    fn out_of_time(&self) -> bool {
        self.controls.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    /// Sets variable bounds and local rows for `node`.
    fn load(&mut self, node: &Node) {
        let mut want: Vec<(f64, f64)> = self.model.variables.iter().map(|v| (v.lower, v.upper)).collect();
        for &(j, value) in &node.fixings {
            let v = if value { 1.0 } else { 0.0 };
            want[j] = (v, v);
        }
        for (j, &w) in want.iter().enumerate() {
            if self.bounds[j] != w {
                self.lp.set_bounds(j, w.0, w.1);
                self.bounds[j] = w;
            }
        }
        let mut drop = Vec::new();
        let mut present = Vec::new();
        for (k, r) in self.loaded.iter().enumerate() {
            if let RowRef::Local(id) = *r {
                if node.local_rows.contains(&id) {
                    present.push(id);
                } else {
                    drop.push(k);
                }
            }
        }
        if !drop.is_empty() {
            self.lp.remove_rows(&drop);
            for &k in drop.iter().rev() {
                self.loaded.remove(k);
            }
        }
        for &id in &node.local_rows {
            if !present.contains(&id) {
                let row = &self.local_store[id];
                self.lp.add_row(&row.coeffs, row.lower, row.upper);
                self.loaded.push(RowRef::Local(id));
            }
        }
    }

    /// Solves the node LP, retrying once from a fresh engine if the warm
    /// start stalls.
    fn solve_lp(&mut self) -> LpStatus {
        let status = self.lp.solve();
        if status != LpStatus::IterationLimit {
            return status;
        }
        log::warn!("simplex stalled; rebuilding the relaxation");
        self.iterations_before += self.lp.iterations();
        let mut fresh = self.model.engine();
        // model.engine() already holds the original rows; rebuild the rest
        let extra: Vec<Row> = self.loaded[self.model.rows.len()..]
            .iter()
            .map(|r| match *r {
                RowRef::Global(k) => self.global_rows[k].clone(),
                RowRef::Local(k) => self.local_store[k].clone(),
            })
            .collect();
        for row in &extra {
            fresh.add_row(&row.coeffs, row.lower, row.upper);
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            fresh.set_bounds(j, lo, hi);
        }
        self.lp = fresh;
        self.lp.solve()
    }

    fn finish(self, status: MipStatus) -> MipResult {
        let inc_value = self.incumbent.as_ref().map(|(_, v)| *v);
        let open_bound = self
            .slots
            .iter()
            .flatten()
            .map(|n| n.bound)
            .fold(f64::INFINITY, f64::min);
        let bound = match status {
            MipStatus::Optimal => inc_value.unwrap_or(f64::INFINITY),
            MipStatus::Unbounded => -f64::INFINITY,
            _ => open_bound.min(inc_value.unwrap_or(f64::INFINITY)),
        };
        MipResult {
            status,
            objective: inc_value.map(|v| self.sign * v),
            incumbent: self.incumbent.map(|(x, _)| x),
            bound: self.sign * bound,
            root_bound: self.root_bound.map(|b| self.sign * b),
            nodes: self.nodes,
            accepted_solutions: self.accepted,
            lp_iterations: self.iterations_before + self.lp.iterations(),
        }
    }
}

fn is_fractional(v: f64) -> bool {
    let frac = v - v.floor();
    frac > INTEGRALITY_TOL && frac < 1.0 - INTEGRALITY_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mip::Variable;
    use rand::{Rng, SeedableRng};

    fn knapsack_model() -> MipModel {
        let mut m = MipModel::new(ObjSense::Maximize);
        for p in [6.0, 5.0, 4.0] {
            m.add_variable(Variable::binary(), p);
        }
        m.add_row(Row::new(vec![(0, 3.0), (1, 2.0), (2, 1.0)], -f64::INFINITY, 4.0));
        m.integral_objective = true;
        m
    }

    #[test]
    fn knapsack_as_mip() {
        let r = branch_and_cut(&knapsack_model(), &MipControls::default(), &mut NoCallbacks);
        assert_eq!(r.status, MipStatus::Optimal);
        assert_eq!(r.objective, Some(10.0));
    }

    #[test]
    fn cutoff_above_optimum() {
        // optimum 9 once item 0 is worth nothing
        let mut m = knapsack_model();
        m.objective[0] = 0.0;
        let controls = MipControls {
            lower_cutoff: Some(10.0),
            ..MipControls::default()
        };
        let r = branch_and_cut(&m, &controls, &mut NoCallbacks);
        assert_eq!(r.status, MipStatus::CutoffInfeasible);
        assert!(r.incumbent.is_none());
    }

    #[test]
    fn infeasible_model() {
        let mut m = MipModel::new(ObjSense::Minimize);
        m.add_variable(Variable::binary(), 1.0);
        m.add_row(Row::new(vec![(0, 2.0)], 1.0, 1.0));
        let r = branch_and_cut(&m, &MipControls::default(), &mut NoCallbacks);
        assert_eq!(r.status, MipStatus::Infeasible);
    }

    /// Accepts nothing with `x_0 + x_1 > 1` unless the row is in the model.
    struct LazyPair {
        calls: usize,
    }

    impl MipCallbacks for LazyPair {
        fn on_integer(&mut self, _ctx: &NodeContext<'_>, x: &[f64]) -> CandidateVerdict {
            self.calls += 1;
            if x[0] + x[1] > 1.5 {
                CandidateVerdict::Reject {
                    rows: vec![CutRow::global(Row::new(vec![(0, 1.0), (1, 1.0)], -f64::INFINITY, 1.0))],
                    post: None,
                }
            } else {
                CandidateVerdict::Accept { objective: None }
            }
        }
    }

    #[test]
    fn lazy_rows_are_enforced() {
        let mut m = MipModel::new(ObjSense::Maximize);
        for p in [3.0, 2.0, 1.0] {
            m.add_variable(Variable::binary(), p);
        }
        m.integral_objective = true;
        let mut cb = LazyPair { calls: 0 };
        let r = branch_and_cut(&m, &MipControls::default(), &mut cb);
        assert_eq!(r.objective, Some(4.0));
        assert_eq!(r.incumbent.unwrap()[..2], [1.0, 0.0]);
        assert!(cb.calls >= 2);
    }

    #[test]
    fn local_rows_stay_in_their_subtree() {
        // the local row x_1 ≤ 0 is added at a node where x_0 = 1; the other
        // branch must still see x_1 free
        struct Local;
        impl MipCallbacks for Local {
            fn on_integer(&mut self, ctx: &NodeContext<'_>, x: &[f64]) -> CandidateVerdict {
                let fixed_one = ctx.fixings.contains(&(0, true));
                if fixed_one && x[1] > 0.5 {
                    return CandidateVerdict::Reject {
                        rows: vec![CutRow::local(Row::new(vec![(1, 1.0)], -f64::INFINITY, 0.0))],
                        post: None,
                    };
                }
                if ctx.fixings.is_empty() {
                    return CandidateVerdict::Reject {
                        rows: Vec::new(),
                        post: None,
                    };
                }
                CandidateVerdict::Accept { objective: None }
            }
        }
        let mut m = MipModel::new(ObjSense::Maximize);
        m.add_variable(Variable::binary(), 2.0);
        m.add_variable(Variable::binary(), 3.0);
        m.integral_objective = true;
        let r = branch_and_cut(&m, &MipControls::default(), &mut Local);
        assert_eq!(r.status, MipStatus::Optimal);
        assert_eq!(r.objective, Some(3.0));
        assert_eq!(r.incumbent.unwrap(), vec![0.0, 1.0]);
    }

    /// Random pure 0-1 program with integer data.
    pub(crate) fn random_program(rng: &mut impl Rng) -> MipModel {
        let n = rng.gen_range(1..=12);
        let rows = rng.gen_range(0..=6);
        let sense = if rng.gen_bool(0.5) {
            ObjSense::Maximize
        } else {
            ObjSense::Minimize
        };
        let mut m = MipModel::new(sense);
        for _ in 0..n {
            m.add_variable(Variable::binary(), rng.gen_range(-10..=10) as f64);
        }
        for _ in 0..rows {
            let mut coeffs = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    coeffs.push((j, rng.gen_range(-5..=8) as f64));
                }
            }
            let rhs = rng.gen_range(-2..=12) as f64;
            match rng.gen_range(0..4) {
                0 => m.add_row(Row::new(coeffs, rhs - 6.0, rhs)),
                1 => m.add_row(Row::new(coeffs, rhs - 8.0, f64::INFINITY)),
                _ => m.add_row(Row::new(coeffs, -f64::INFINITY, rhs)),
            }
        }
        m.integral_objective = true;
        m
    }

    pub(crate) fn enumerate(m: &MipModel) -> Option<f64> {
        let n = m.num_vars();
        let mut best: Option<f64> = None;
        for mask in 0u32..1 << n {
            let x: Vec<f64> = (0..n).map(|j| (mask >> j & 1) as f64).collect();
            if m.rows.iter().all(|r| r.violation(&x) <= 1e-9) {
                let v = m.objective_value(&x);
                best = Some(match (best, m.sense) {
                    (None, _) => v,
                    (Some(b), ObjSense::Maximize) => b.max(v),
                    (Some(b), ObjSense::Minimize) => b.min(v),
                });
            }
        }
        best
    }

    #[test]
    fn random_programs_match_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            let m = random_program(&mut rng);
            let expected = enumerate(&m);
            for branching in [Branching::MostFractional, Branching::Pseudocost, Branching::Reliability] {
                for node_selection in [NodeSelection::BestBound, NodeSelection::DepthFirst] {
                    let controls = MipControls {
                        branching,
                        node_selection,
                        ..MipControls::default()
                    };
                    let r = branch_and_cut(&m, &controls, &mut NoCallbacks);
                    let tag = format!("trial {trial} {branching:?} {node_selection:?}");
                    match expected {
                        None => assert_eq!(r.status, MipStatus::Infeasible, "{tag}"),
                        Some(v) => {
                            assert_eq!(r.status, MipStatus::Optimal, "{tag}");
                            assert_eq!(r.objective, Some(v), "{tag}");
                            assert!(m.is_feasible(r.incumbent.as_ref().unwrap(), 1e-6));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn solution_limit_stops_early_above_cutoff() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut checked = 0;
        while checked < 50 {
            let mut m = random_program(&mut rng);
            m.sense = ObjSense::Maximize;
            let Some(opt) = enumerate(&m) else { continue };
            let cutoff = opt - 3.0;
            let controls = MipControls {
                lower_cutoff: Some(cutoff),
                solution_limit: Some(1),
                ..MipControls::default()
            };
            let r = branch_and_cut(&m, &controls, &mut NoCallbacks);
            assert_eq!(r.status, MipStatus::SolutionLimit);
            let v = r.objective.unwrap();
            assert!(v > cutoff && v <= opt);
            assert!(m.is_feasible(r.incumbent.as_ref().unwrap(), 1e-6));
            checked += 1;
        }
    }
}
