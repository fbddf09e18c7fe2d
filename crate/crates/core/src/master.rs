//! The outer branch-and-cut: `min θ` over `w ∈ W` subject to fortification
//! cuts `θ ≥ Φ_I(x̂) - Σ coeff_i w_i`, which are generated lazily at integer
//! master points by the separation engine.

use std::collections::HashSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::error::Result;
use crate::mip::{
    branch_and_cut, Branching, CandidateVerdict, CutRow, MipCallbacks, MipControls, MipModel, MipStatus, NodeContext,
    ObjSense, Row, Variable,
};
use crate::model::{canonicalize, FortificationStrategy, Instance, InterdictionStrategy, Selection};
use crate::recourse::RecourseOracle;
use crate::separation::{ratio_cmp, SeparationOutcome, Separator};
use crate::strengthen::{combine, cut_with, enumerative_coefficients, EnumLimits, EnumerationGate};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CutScope {
    Global,
    /// Valid only for `w` that agree with these fixings.
    Local(Vec<(usize, bool)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strengthening {
    None,
    /// Capped with the given lower bound.
    Bound(i64),
    Enum,
    /// Enumerative coefficients capped with the given lower bound.
    Combined(i64),
}

/// `θ ≥ base_value - Σ coeff_i w_i`, with coefficients only on `S(x̂)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FortificationCut {
    pub base_value: i64,
    pub coeffs: Vec<(usize, i64)>,
    pub source_x: InterdictionStrategy,
    pub scope: CutScope,
    pub strengthening: Strengthening,
}

impl FortificationCut {
    /// The unstrengthened cut with `coeff_i = d_i`.
    pub fn base(x_hat: &Selection, phi: i64, penalty: &[i64]) -> Self {
        cut_with(x_hat, phi, penalty, CutScope::Global, Strengthening::None)
    }

    pub fn rhs(&self, w: &Selection) -> i64 {
        self.base_value - self.coeffs.iter().filter(|c| w[c.0]).map(|c| c.1).sum::<i64>()
    }

    /// Whether `w` lies in the region where the cut is valid.
    pub fn applies_to(&self, w: &Selection) -> bool {
        match &self.scope {
            CutScope::Global => true,
            CutScope::Local(fix) => fix.iter().all(|&(i, v)| w[i] == v),
        }
    }

    /// `θ + Σ coeff_i w_i ≥ base_value`.
    fn row(&self, theta: usize) -> Row {
        let mut coeffs: Vec<(usize, f64)> = self
            .coeffs
            .iter()
            .filter(|c| c.1 != 0)
            .map(|&(i, a)| (i, a as f64))
            .collect();
        coeffs.push((theta, 1.0));
        Row::new(coeffs, self.base_value as f64, f64::INFINITY)
    }
}

impl fmt::Display for FortificationCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.strengthening {
            Strengthening::None => "base".to_string(),
            Strengthening::Bound(z) => format!("bound({z})"),
            Strengthening::Enum => "enum".to_string(),
            Strengthening::Combined(z) => format!("combined({z})"),
        };
        let scope = match &self.scope {
            CutScope::Global => "global".to_string(),
            CutScope::Local(fix) => format!("local[{}]", fix.len()),
        };
        write!(f, "{kind} {scope} x={} phi={} coeffs=", self.source_x, self.base_value)?;
        let parts: Vec<String> = self.coeffs.iter().map(|(i, a)| format!("{i}:{a}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub fn evaluate_cut(cut: &FortificationCut, w: &Selection) -> i64 {
    cut.rhs(w)
}

pub fn is_violated(cut: &FortificationCut, w: &Selection, theta: i64) -> bool {
    theta < cut.rhs(w)
}

/// One base cut per asset used by the uninterdicted recourse solution:
/// start from that asset alone and greedily extend the attack by the best
/// `d/g` ratio among assets used by the current recourse solution.
pub fn initial_cuts(instance: &Instance) -> Vec<FortificationCut> {
    initial_with(instance, &RecourseOracle::new(instance))
}

fn initial_with(instance: &Instance, oracle: &RecourseOracle) -> Vec<FortificationCut> {
    let n = instance.n();
    let g = &instance.interdict_cost;
    let d = &instance.penalty;
    let (_, y0) = oracle.solve(&vec![false; n]);
    let mut cuts = Vec::new();
    for &seed in &y0 {
        if g[seed] > instance.interdict_budget {
            continue;
        }
        let mut x = vec![false; n];
        x[seed] = true;
        let mut room = instance.interdict_budget - g[seed];
        let phi = loop {
            let (value, y) = oracle.solve(&x);
            let best = y
                .iter()
                .copied()
                .filter(|&i| !x[i] && g[i] <= room)
                .max_by(|&i, &j| ratio_cmp(d[i], g[i], d[j], g[j]).then(j.cmp(&i)));
            match best {
                Some(i) => {
                    x[i] = true;
                    room -= g[i];
                }
                None => break value,
            }
        };
        cuts.push(FortificationCut::base(&Selection::from_bools(x), phi, d));
    }
    cuts
}

/// An optimal attack against `w`: a stored cut source with `Φ_I(x̂) = θ`
/// when one is feasible for `w`, otherwise the exact attacker optimum.
pub fn recover_attacker_response(
    instance: &Instance,
    w: &FortificationStrategy,
    theta: i64,
    cuts: &[FortificationCut],
) -> InterdictionStrategy {
    let canon = canonicalize(instance).expect("valid instance");
    if let Some(c) = cuts
        .iter()
        .find(|c| c.base_value == theta && canon.is_feasible_x(w, &c.source_x))
    {
        return c.source_x.clone();
    }
    crate::separation::solve_interdiction(&canon, w).1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    NodeLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    /// Root LP bound in the reporting sense.
    pub root_bound: Option<f64>,
    /// `|z - root bound| / |z|` in percent.
    pub root_gap_pct: Option<f64>,
    pub nodes: usize,
    pub initial_cuts: usize,
    /// Fortification cuts added after initialization (global and local).
    pub fort_cuts: usize,
    pub local_cuts: usize,
    pub int_cuts: usize,
    pub separations: usize,
    pub greedy_hits: usize,
    pub enum_trials: usize,
    pub enum_improved: usize,
    pub enum_disabled: bool,
    pub time: Duration,
    pub seed: u64,
}

/// Everything the run produced, for auditing.
#[derive(Debug, Clone, Default)]
pub struct SolveTrace {
    pub cuts: Vec<FortificationCut>,
    /// Integer master candidates `(w*, θ*)` passed to separation.
    pub candidates: Vec<(Selection, i64)>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// `z*` in the instance's reporting sense; `None` if no fortification
    /// was verified before a limit hit.
    pub objective: Option<i64>,
    pub fortification: Option<FortificationStrategy>,
    pub attack: Option<InterdictionStrategy>,
    /// Best bound in the reporting sense.
    pub bound: f64,
    pub stats: SolveStats,
    pub trace: Option<SolveTrace>,
}

impl SolveResult {
    /// Final gap in percent.
    pub fn gap_pct(&self) -> Option<f64> {
        self.objective.map(|z| gap_pct(z as f64, self.bound))
    }
}

fn gap_pct(z: f64, bound: f64) -> f64 {
    let diff = (z - bound).abs();
    if diff < 1e-9 {
        0.0
    } else {
        100.0 * diff / z.abs().max(1e-9)
    }
}

struct Master<'a> {
    instance: &'a Instance,
    oracle: &'a RecourseOracle,
    config: &'a SolverConfig,
    separator: Separator<'a>,
    n: usize,
    theta: usize,
    z0: i64,
    lower: i64,
    gate: EnumerationGate,
    rng: ChaCha8Rng,
    deadline: Option<Instant>,
    cuts: Vec<FortificationCut>,
    seen: HashSet<(Vec<(usize, i64)>, i64)>,
    candidates: Vec<(Selection, i64)>,
    timed_out: bool,
    enum_trials: usize,
    enum_improved: usize,
    added: usize,
    local_added: usize,
}

impl Master<'_> {
    fn cuts_for(&mut self, x_hat: &Selection, phi: i64, ctx: &NodeContext<'_>) -> Vec<FortificationCut> {
        let settings = self.config.settings;
        let d = &self.instance.penalty;
        let mut coeffs = d.clone();
        let mut kind = Strengthening::None;
        if settings.enumerative && !self.gate.is_disabled() {
            let limits = EnumLimits {
                max_support: self.config.enum_max_support,
                max_subsets: self.config.enum_max_subsets,
            };
            let dt = enumerative_coefficients(self.instance, self.oracle, x_hat, phi, self.z0, limits, &mut self.rng);
            let improved = x_hat.iter_ones().any(|i| dt[i] != d[i]);
            self.enum_trials += 1;
            if improved {
                self.enum_improved += 1;
            }
            self.gate.record(improved);
            coeffs = dt;
            kind = Strengthening::Enum;
        }
        if !settings.bound {
            return vec![cut_with(x_hat, phi, &coeffs, CutScope::Global, kind)];
        }
        let bounded = |z: i64| match kind {
            Strengthening::Enum => Strengthening::Combined(z),
            _ => Strengthening::Bound(z),
        };
        let z = self.lower;
        let mut out = vec![cut_with(
            x_hat,
            phi,
            &combine(&coeffs, phi, Some(z)),
            CutScope::Global,
            bounded(z),
        )];
        let zeta = (ctx.node_bound - 1e-6).ceil() as i64;
        if zeta > z && !ctx.fixings.is_empty() {
            out.push(cut_with(
                x_hat,
                phi,
                &combine(&coeffs, phi, Some(zeta)),
                CutScope::Local(ctx.fixings.to_vec()),
                bounded(zeta),
            ));
        }
        out
    }
}

impl MipCallbacks for Master<'_> {
    fn on_integer(&mut self, ctx: &NodeContext<'_>, x: &[f64]) -> CandidateVerdict {
        let w = Selection::from_bools(x[..self.n].iter().map(|&v| v > 0.5).collect());
        let theta_star = self.z0.max((x[self.theta] - 1e-6).ceil() as i64);
        self.lower = self.lower.max((ctx.global_bound - 1e-6).ceil() as i64);
        if self.config.record_trace {
            self.candidates.push((w.clone(), theta_star));
        }
        let (attack, phi) = match self.separator.separate(&w, theta_star, self.deadline) {
            SeparationOutcome::Feasible => {
                return CandidateVerdict::Accept {
                    objective: Some(theta_star as f64),
                }
            }
            SeparationOutcome::Violated { attack, value } => (attack, value),
            SeparationOutcome::LimitHit { best } => {
                self.timed_out = true;
                match best {
                    Some(b) => b,
                    None => {
                        return CandidateVerdict::Reject {
                            rows: Vec::new(),
                            post: None,
                        }
                    }
                }
            }
        };
        let new_cuts = self.cuts_for(&attack, phi, ctx);
        debug_assert!(new_cuts[0].rhs(&w) > theta_star);
        let mut rows = Vec::new();
        for cut in new_cuts {
            log::trace!("cut {cut} violation={}", cut.rhs(&w) - theta_star);
            let row = cut.row(self.theta);
            match cut.scope {
                CutScope::Global => {
                    rows.push(CutRow::global(row));
                    if !self.seen.insert((cut.coeffs.clone(), cut.base_value)) {
                        continue;
                    }
                }
                CutScope::Local(_) => {
                    rows.push(CutRow::local(row));
                    self.local_added += 1;
                }
            }
            self.added += 1;
            self.cuts.push(cut);
        }
        CandidateVerdict::Reject { rows, post: None }
    }

    fn should_terminate(&mut self) -> bool {
        self.timed_out
    }
}

/// Solves the fortification game exactly (up to the configured limits).
/// Maximizing instances are handled through their minimizing form and
/// reported in their own sense.
pub fn solve_fortification(instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    let start = Instant::now();
    let canon = canonicalize(instance)?;
    let n = canon.n();
    let oracle = RecourseOracle::new(&canon);
    let (z0, y0) = oracle.solve(&vec![false; n]);
    let t_max = z0 + y0.iter().map(|&i| canon.penalty[i]).sum::<i64>();
    let deadline = config.time_limit.map(|d| start + d);

    let mut model = MipModel::new(ObjSense::Minimize);
    for i in 0..n {
        let var = if canon.fortify_cost[i] > canon.fortify_budget {
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
    let theta = model.add_variable(Variable::continuous(z0 as f64, t_max as f64), 1.0);
    model.integral_objective = true;
    let budget: Vec<(usize, f64)> = (0..n)
        .filter(|&i| canon.fortify_cost[i] > 0)
        .map(|i| (i, canon.fortify_cost[i] as f64))
        .collect();
    if !budget.is_empty() {
        model.add_row(Row::new(budget, f64::NEG_INFINITY, canon.fortify_budget as f64));
    }

    let mut master = Master {
        instance: &canon,
        oracle: &oracle,
        config,
        separator: Separator::new(&canon, &oracle, config),
        n,
        theta,
        z0,
        lower: z0,
        gate: EnumerationGate::new(config.enum_disable_after),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        deadline,
        cuts: Vec::new(),
        seen: HashSet::new(),
        candidates: Vec::new(),
        timed_out: false,
        enum_trials: 0,
        enum_improved: 0,
        added: 0,
        local_added: 0,
    };

    // initial cuts go through the same strengthening as separated ones
    let root_ctx = NodeContext {
        node_id: 0,
        depth: 0,
        node_bound: z0 as f64,
        global_bound: z0 as f64,
        incumbent: None,
        fixings: &[],
    };
    let initial = initial_with(&canon, &oracle);
    for base in &initial {
        let x_hat = base.source_x.clone();
        for cut in master.cuts_for(&x_hat, base.base_value, &root_ctx) {
            if master.seen.insert((cut.coeffs.clone(), cut.base_value)) {
                model.add_row(cut.row(theta));
                master.cuts.push(cut);
            }
        }
    }
    let n_initial = master.cuts.len();

    let controls = MipControls {
        time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
        node_limit: config.node_limit,
        branching: Branching::Reliability,
        ..MipControls::default()
    };
    let result = branch_and_cut(&model, &controls, &mut master);

    let status = match result.status {
        MipStatus::Optimal => SolveStatus::Optimal,
        MipStatus::NodeLimit => SolveStatus::NodeLimit,
        MipStatus::TimeLimit | MipStatus::Interrupted => SolveStatus::TimeLimit,
        other => unreachable!("the master always has the feasible point w = 0: {other:?}"),
    };
    let z_min = result.objective.map(|v| v.round() as i64);
    let w_star = result
        .incumbent
        .as_ref()
        .map(|x| Selection::from_bools(x[..n].iter().map(|&v| v > 0.5).collect()));
    let attack = match (&w_star, z_min) {
        (Some(w), Some(z)) if status == SolveStatus::Optimal => {
            Some(recover_attacker_response(&canon, w, z, &master.cuts))
        }
        _ => None,
    };

    let sign = canon.report(1) as f64;
    let bound_min = if status == SolveStatus::Optimal {
        z_min.map_or(result.bound, |z| z as f64)
    } else {
        // θ never drops below the unattacked recourse value, even when the
        // limit struck before the first LP
        result.bound.max(z0 as f64)
    };
    let root_bound = result.root_bound.map(|b| sign * b);
    let objective = z_min.map(|z| canon.report(z));
    let stats = SolveStats {
        root_bound,
        root_gap_pct: match (objective, root_bound) {
            (Some(z), Some(b)) => Some(gap_pct(z as f64, b)),
            _ => None,
        },
        nodes: result.nodes,
        initial_cuts: n_initial,
        fort_cuts: master.added,
        local_cuts: master.local_added,
        int_cuts: master.separator.stats.interdiction_cuts,
        separations: master.separator.stats.calls,
        greedy_hits: master.separator.stats.greedy_hits,
        enum_trials: master.enum_trials,
        enum_improved: master.enum_improved,
        enum_disabled: master.gate.is_disabled(),
        time: start.elapsed(),
        seed: config.seed,
    };
    let trace = config.record_trace.then(|| SolveTrace {
        cuts: std::mem::take(&mut master.cuts),
        candidates: std::mem::take(&mut master.candidates),
    });
    Ok(SolveResult {
        status,
        objective,
        fortification: w_star,
        attack,
        bound: sign * bound_min,
        stats,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Settings;

    fn triangle() -> Instance {
        Instance::shortest_path(3, &[(0, 1, 1, 10), (1, 2, 2, 10), (0, 2, 5, 10)], 0, 2, 1, 2).unwrap()
    }

    #[test]
    fn cut_evaluation() {
        let x = Selection::from_support(3, &[0, 2]);
        let c = FortificationCut::base(&x, 20, &[4, 5, 6]);
        assert_eq!(c.rhs(&Selection::empty(3)), 20);
        assert_eq!(c.rhs(&Selection::from_support(3, &[0, 1, 2])), 10);
        assert!(is_violated(&c, &Selection::empty(3), 19));
        assert!(!is_violated(&c, &Selection::empty(3), 20));
        let empty = FortificationCut::base(&Selection::empty(3), 3, &[4, 5, 6]);
        assert_eq!(evaluate_cut(&empty, &Selection::from_support(3, &[1])), 3);
    }

    #[test]
    fn initial_cuts_on_chain() {
        let chain = Instance::shortest_path(3, &[(0, 1, 1, 4), (1, 2, 1, 4)], 0, 2, 1, 1).unwrap();
        assert_eq!(initial_cuts(&chain).len(), 2);
        let kp = Instance::knapsack(vec![3, 4], vec![2, 2], 0, vec![1, 1], vec![1, 1], 1, 1).unwrap();
        assert!(initial_cuts(&canonicalize(&kp).unwrap()).is_empty());
    }

    #[test]
    fn triangle_solves_under_all_settings() {
        // B_F = 1, B_I = 2: fortifying s->t leaves the attacker blocking the
        // detour, so the defender pays 5
        for s in Settings::all() {
            let r = solve_fortification(&triangle(), &SolverConfig::new(s)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            assert_eq!(r.objective, Some(5), "{s}");
            let w = r.fortification.unwrap();
            let x = r.attack.unwrap();
            assert!(triangle().is_feasible_x(&w, &x));
        }
    }

    #[test]
    fn trivial_budgets() {
        let none = triangle().with_budgets(1, 0).unwrap();
        let r = solve_fortification(&none, &SolverConfig::new(Settings::NONE)).unwrap();
        assert_eq!(r.objective, Some(3));
        assert_eq!(r.fortification.unwrap().count(), 0);
        let free = triangle().with_budgets(0, 2).unwrap();
        let r = solve_fortification(&free, &SolverConfig::new(Settings::NONE)).unwrap();
        assert_eq!(r.objective, Some(13));
    }

    #[test]
    fn knapsack_reports_in_max_sense() {
        let kp = Instance::knapsack(vec![6, 5, 4], vec![3, 2, 2], 4, vec![1; 3], vec![1; 3], 1, 1).unwrap();
        let r = solve_fortification(&kp, &SolverConfig::new("BEG".parse().unwrap())).unwrap();
        // without attack the defender packs items 1 and 2 for 9; the attacker
        // removes the best unprotected item
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.objective.unwrap() <= 9);
    }
}
