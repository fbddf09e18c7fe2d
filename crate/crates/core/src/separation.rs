//! Separation of fortification cuts: given an integer master point
//! `(w*, θ*)`, find an attack `x̂ ∈ X(w*)` with `Φ_I(x̂) > θ*` or show that
//! none exists.
//!
//! The exact check solves the bilevel problem
//! `max t  s.t.  t ≤ c·ŷ + Σ d_i ŷ_i x_i  for all recourse solutions ŷ`
//! by branch-and-cut, generating the interdiction cuts lazily. All values
//! are in minimizing form, so the instance must be canonical.

use std::collections::{HashSet, VecDeque};
use std::time::Instant;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::mip::{
    branch_and_cut, Branching, CandidateVerdict, CutRow, MipCallbacks, MipControls, MipModel, MipStatus, NodeContext,
    ObjSense, Row, Variable,
};
use crate::model::{Instance, InterdictionStrategy, Selection, Sense};
use crate::recourse::RecourseOracle;

/// `t ≤ base + Σ coeff_i x_i` for a stored recourse solution `ŷ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterdictionCut {
    pub source_y: Vec<usize>,
    /// `c·ŷ`.
    pub base: i64,
    pub coeffs: Vec<(usize, i64)>,
    /// The artificial bound `ℓ` when the cut is strengthened.
    pub level: Option<i64>,
}

impl InterdictionCut {
    /// `t ≤ c·ŷ + Σ d_i ŷ_i x_i`.
    pub fn plain(source_y: &[usize], base: i64, penalty: &[i64]) -> Self {
        InterdictionCut {
            source_y: source_y.to_vec(),
            base,
            coeffs: source_y.iter().map(|&i| (i, penalty[i])).collect(),
            level: None,
        }
    }

    pub fn rhs(&self, x: &[bool]) -> i64 {
        self.base + self.coeffs.iter().filter(|c| x[c.0]).map(|c| c.1).sum::<i64>()
    }

    fn row(&self, t: usize) -> Row {
        let mut coeffs: Vec<(usize, f64)> = self
            .coeffs
            .iter()
            .filter(|c| c.1 != 0)
            .map(|&(i, a)| (i, -(a as f64)))
            .collect();
        coeffs.push((t, 1.0));
        Row::new(coeffs, f64::NEG_INFINITY, self.base as f64)
    }
}

/// Lifts the cut of `ŷ` with the artificial bound `ℓ > θ*`: coefficients
/// become `min{(ℓ - c·ŷ)⁺, d_i}`.
pub fn strengthen_interdiction_cut(
    source_y: &[usize],
    base: i64,
    level: i64,
    theta: i64,
    penalty: &[i64],
) -> Result<InterdictionCut> {
    if level <= theta {
        return Err(Error::InvalidLevel { level, theta });
    }
    let cap = (level - base).max(0);
    Ok(InterdictionCut {
        source_y: source_y.to_vec(),
        base,
        coeffs: source_y.iter().map(|&i| (i, penalty[i].min(cap))).collect(),
        level: Some(level),
    })
}

/// Recourse solutions seen so far, oldest evicted first.
#[derive(Debug, Clone)]
pub struct RecoursePool {
    capacity: usize,
    entries: VecDeque<Vec<usize>>,
    seen: HashSet<Vec<usize>>,
}

impl RecoursePool {
    pub fn new(capacity: usize) -> Self {
        RecoursePool {
            capacity: capacity.max(1),
            entries: VecDeque::new(),
            seen: HashSet::new(),
        }
    }

    /// Adds a solution support; returns `false` if it was already stored.
    pub fn insert(&mut self, support: Vec<usize>) -> bool {
        if self.seen.contains(&support) {
            return false;
        }
        if self.entries.len() == self.capacity {
            if let Some(old) = self.entries.pop_front() {
                self.seen.remove(&old);
            }
        }
        self.seen.insert(support.clone());
        self.entries.push_back(support);
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Vec<usize>> + ExactSizeIterator {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparationOutcome {
    /// `attack ∈ X(w*)` with `Φ_I(attack) = value > θ*`.
    Violated {
        attack: InterdictionStrategy,
        value: i64,
    },
    Feasible,
    /// The time limit ran out first.
    LimitHit {
        best: Option<(InterdictionStrategy, i64)>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct SeparationStats {
    pub calls: usize,
    pub greedy_hits: usize,
    pub mip_solves: usize,
    pub interdiction_cuts: usize,
    pub mip_nodes: usize,
}

/// Greedy attack against `w` (min-form instance): repeatedly solve the
/// recourse and interdict the used, unfortified, affordable asset with the
/// best penalty per unit cost. Knapsack recourses are solved greedily.
pub fn greedy_interdiction(instance: &Instance, w: &Selection) -> InterdictionStrategy {
    greedy_with(instance, &RecourseOracle::new(instance), w)
}

fn greedy_with(instance: &Instance, oracle: &RecourseOracle, w: &Selection) -> InterdictionStrategy {
    let n = instance.n();
    let g = &instance.interdict_cost;
    let d = &instance.penalty;
    let mut x = vec![false; n];
    let mut room = instance.interdict_budget;
    loop {
        let (_, y) = oracle.solve_greedy(&x);
        let best = y
            .iter()
            .copied()
            .filter(|&i| !x[i] && !w[i] && g[i] <= room)
            .max_by(|&i, &j| ratio_cmp(d[i], g[i], d[j], g[j]).then(j.cmp(&i)));
        match best {
            Some(i) => {
                x[i] = true;
                room -= g[i];
            }
            None => return Selection::from_bools(x),
        }
    }
}

/// Compares `di/gi` with `dj/gj`; zero cost counts as an infinite ratio.
pub(crate) fn ratio_cmp(di: i64, gi: i64, dj: i64, gj: i64) -> std::cmp::Ordering {
    match (gi == 0, gj == 0) {
        (true, true) => di.cmp(&dj),
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
        _ => (di as i128 * gj as i128).cmp(&(dj as i128 * gi as i128)),
    }
}

/// Separation engine reused across master candidates.
pub struct Separator<'a> {
    instance: &'a Instance,
    oracle: &'a RecourseOracle,
    config: &'a SolverConfig,
    z0: i64,
    t_max: i64,
    pub pool: RecoursePool,
    pub stats: SeparationStats,
}

impl<'a> Separator<'a> {
    pub fn new(instance: &'a Instance, oracle: &'a RecourseOracle, config: &'a SolverConfig) -> Self {
        assert_eq!(instance.sense, Sense::Min, "separation works on canonical instances");
        let n = instance.n();
        let (z0, y0) = oracle.solve(&vec![false; n]);
        let t_max = z0 + y0.iter().map(|&i| instance.penalty[i]).sum::<i64>();
        let mut pool = RecoursePool::new(config.pool_capacity);
        pool.insert(y0);
        Separator {
            instance,
            oracle,
            config,
            z0,
            t_max,
            pool,
            stats: SeparationStats::default(),
        }
    }

    /// Full separation of `(w, θ)`: greedy first when enabled, then the
    /// exact bilevel model.
    pub fn separate(&mut self, w: &Selection, theta: i64, deadline: Option<Instant>) -> SeparationOutcome {
        self.stats.calls += 1;
        if self.config.settings.greedy {
            let x = greedy_with(self.instance, self.oracle, w);
            let (value, y) = self.oracle.solve(x.as_slice());
            self.pool.insert(y);
            if value > theta {
                self.stats.greedy_hits += 1;
                return SeparationOutcome::Violated { attack: x, value };
            }
        }
        self.solve_sep(w, Some(theta), self.config.settings.lifted, deadline)
    }

    /// Exact attacker problem for `w`: `Φ_F(w)` and a maximizer.
    pub fn interdiction_value(&mut self, w: &Selection) -> (i64, InterdictionStrategy) {
        match self.solve_sep(w, None, false, None) {
            SeparationOutcome::Violated { attack, value } => (value, attack),
            other => unreachable!("uncut separation always finds an attack: {other:?}"),
        }
    }

    /// Builds and solves SEP (or SEP-L when `lifted`). Without a `theta`
    /// the model is solved to optimality and the best attack is returned.
    fn solve_sep(
        &mut self,
        w: &Selection,
        theta: Option<i64>,
        lifted: bool,
        deadline: Option<Instant>,
    ) -> SeparationOutcome {
        self.stats.mip_solves += 1;
        let inst = self.instance;
        let n = inst.n();
        let level = match (lifted, theta) {
            (true, Some(th)) => Some((th as f64 + self.config.epsilon).ceil() as i64),
            _ => None,
        };
        let mut model = MipModel::new(ObjSense::Maximize);
        for i in 0..n {
            let blocked = w[i] || inst.interdict_cost[i] > inst.interdict_budget;
            let var = if blocked {
                Variable {
                    lower: 0.0,
                    upper: 0.0,
                    integer: true,
                }
            } else {
                Variable::binary()
            };
            model.add_variable(var, 0.0);
        }
        let t = model.add_variable(Variable::continuous(self.z0 as f64, self.t_max as f64), 1.0);
        model.integral_objective = true;
        let budget: Vec<(usize, f64)> = (0..n)
            .filter(|&i| inst.interdict_cost[i] > 0)
            .map(|i| (i, inst.interdict_cost[i] as f64))
            .collect();
        if !budget.is_empty() {
            model.add_row(Row::new(budget, f64::NEG_INFINITY, inst.interdict_budget as f64));
        }
        let seeded = self.pool.len().min(self.config.pool_seed_rows);
        let mut builder = CutBuilder {
            penalty: &inst.penalty,
            oracle: self.oracle,
            level,
            theta,
            t,
        };
        for y in self.pool.iter().rev().take(seeded) {
            model.add_row(builder.cut(y).row(t));
        }
        let controls = MipControls {
            lower_cutoff: theta.map(|th| th as f64 + self.config.epsilon),
            solution_limit: theta.map(|_| self.config.solution_limit),
            time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
            branching: Branching::Pseudocost,
            ..MipControls::default()
        };
        let unseeded: Vec<Vec<usize>> = self.pool.iter().rev().skip(seeded).cloned().collect();
        let mut cb = SepCallbacks {
            builder: &mut builder,
            n,
            found: Vec::new(),
            unseeded,
            cuts_added: 0,
        };
        let result = branch_and_cut(&model, &controls, &mut cb);
        self.stats.interdiction_cuts += cb.cuts_added;
        self.stats.mip_nodes += result.nodes;
        for y in std::mem::take(&mut cb.found) {
            self.pool.insert(y);
        }
        let best = result.incumbent.as_ref().map(|x| {
            let attack = Selection::from_bools(x[..n].iter().map(|&v| v > 0.5).collect());
            // the incumbent's objective may be a lifted value; re-solve
            let value = self.oracle.solve(attack.as_slice()).0;
            (attack, value)
        });
        match result.status {
            MipStatus::Optimal | MipStatus::SolutionLimit => {
                let (attack, value) = best.expect("incumbent");
                if theta.is_none_or(|th| value > th) {
                    SeparationOutcome::Violated { attack, value }
                } else {
                    SeparationOutcome::Feasible
                }
            }
            MipStatus::CutoffInfeasible | MipStatus::Infeasible => SeparationOutcome::Feasible,
            MipStatus::TimeLimit | MipStatus::NodeLimit | MipStatus::Interrupted => SeparationOutcome::LimitHit {
                best: best.filter(|(_, v)| theta.is_none_or(|th| *v > th)),
            },
            MipStatus::Unbounded => unreachable!("t is bounded"),
        }
    }
}

struct CutBuilder<'a> {
    penalty: &'a [i64],
    oracle: &'a RecourseOracle,
    level: Option<i64>,
    theta: Option<i64>,
    t: usize,
}

impl CutBuilder<'_> {
    fn cut(&mut self, y: &[usize]) -> InterdictionCut {
        let base = self.oracle.nominal_cost(y);
        match (self.level, self.theta) {
            (Some(l), Some(th)) => {
                strengthen_interdiction_cut(y, base, l, th, self.penalty).expect("level exceeds theta")
            }
            _ => InterdictionCut::plain(y, base, self.penalty),
        }
    }
}

struct SepCallbacks<'a, 'b> {
    builder: &'a mut CutBuilder<'b>,
    n: usize,
    found: Vec<Vec<usize>>,
    unseeded: Vec<Vec<usize>>,
    cuts_added: usize,
}

impl MipCallbacks for SepCallbacks<'_, '_> {
    fn on_integer(&mut self, _ctx: &NodeContext<'_>, x: &[f64]) -> CandidateVerdict {
        let bits: Vec<bool> = x[..self.n].iter().map(|&v| v > 0.5).collect();
        let (phi, y) = self.builder.oracle.solve(&bits);
        let cut = self.builder.cut(&y);
        let rhs = cut.rhs(&bits);
        self.found.push(y);
        let t_lp = x[self.builder.t];
        let improving = self.builder.theta.is_none_or(|th| phi > th);
        if t_lp <= rhs as f64 + 1e-6 {
            // the model's value at this point is exact
            let objective = if improving { phi } else { rhs };
            return CandidateVerdict::Accept {
                objective: Some(objective as f64),
            };
        }
        self.cuts_added += 1;
        let mut post_x = x.to_vec();
        post_x[self.builder.t] = phi as f64;
        CandidateVerdict::Reject {
            rows: vec![CutRow::global(cut.row(self.builder.t))],
            post: improving.then_some((post_x, phi as f64)),
        }
    }

    fn on_fractional(&mut self, _ctx: &NodeContext<'_>, x: &[f64]) -> Vec<CutRow> {
        let t = self.builder.t;
        let y = self.builder.oracle.solve_fractional(&x[..self.n]);
        let mut rows = Vec::new();
        let row = self.builder.cut(&y).row(t);
        if row.violation(x) > 1e-6 {
            rows.push(CutRow::global(row));
            self.found.push(y);
        }
        // the most violated pool entry that did not seed the model
        let mut best: Option<(f64, usize)> = None;
        for (k, y) in self.unseeded.iter().enumerate() {
            let v = self.builder.cut(y).row(t).violation(x);
            if v > 1e-6 && best.is_none_or(|b| v > b.0) {
                best = Some((v, k));
            }
        }
        if let Some((_, k)) = best {
            let y = self.unseeded.swap_remove(k);
            rows.push(CutRow::global(self.builder.cut(&y).row(t)));
        }
        self.cuts_added += rows.len();
        rows
    }
}

/// One-shot separation of `(w, θ)` on a canonical instance.
pub fn separate(
    instance: &Instance,
    w: &Selection,
    theta: i64,
    config: &SolverConfig,
    pool: &mut RecoursePool,
) -> SeparationOutcome {
    let oracle = RecourseOracle::new(instance);
    let mut sep = Separator::new(instance, &oracle, config);
    for y in pool.iter() {
        sep.pool.insert(y.clone());
    }
    let out = sep.separate(w, theta, config.time_limit.map(|d| Instant::now() + d));
    for y in sep.pool.iter() {
        pool.insert(y.clone());
    }
    out
}

/// `Φ_F(w)` with a maximizing attack, by exact separation (canonical
/// instance).
pub fn solve_interdiction(instance: &Instance, w: &Selection) -> (i64, InterdictionStrategy) {
    let oracle = RecourseOracle::new(instance);
    let config = SolverConfig::new(crate::config::Settings::NONE);
    Separator::new(instance, &oracle, &config).interdiction_value(w)
}
