//! Seeded instance generators for the benchmark families.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Instance;

/// The paper's budget pairs `(B_F, B_I)` for grid networks.
pub const GRID_BUDGETS: [(i64, i64); 6] = [(3, 3), (4, 3), (3, 4), (5, 4), (4, 5), (7, 5)];

/// Directed grid with `rows × cols` inner nodes plus a source (node 0) and a
/// sink (node `rows·cols + 1`); inner node `(r, c)` has id `1 + r·cols + c`.
///
/// Arcs, in order: source to every first-column node; then for each inner
/// node in row-major order its right, down and up neighbours; then every
/// last-column node to the sink. Costs are uniform on `[1, c_max]`, delays
/// on `[1, d_max]`, and both levels have unit costs with the given budgets.
pub fn generate_grid(
    rows: usize,
    cols: usize,
    c_max: i64,
    d_max: i64,
    budgets: (i64, i64),
    seed: u64,
) -> Result<Instance> {
    if rows < 2 || cols < 2 || c_max < 1 || d_max < 1 {
        return Err(Error::InvalidInstance(format!(
            "grid needs rows, cols >= 2 and positive ranges, got {rows}x{cols} ({c_max}-{d_max})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| 1 + r * cols + c;
    let sink = rows * cols + 1;
    let mut ends = Vec::new();
    for r in 0..rows {
        ends.push((0, id(r, 0)));
    }
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                ends.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                ends.push((id(r, c), id(r + 1, c)));
            }
            if r > 0 {
                ends.push((id(r, c), id(r - 1, c)));
            }
        }
    }
    for r in 0..rows {
        ends.push((id(r, cols - 1), sink));
    }
    let arcs: Vec<(usize, usize, i64, i64)> = ends
        .into_iter()
        .map(|(t, h)| (t, h, rng.gen_range(1..=c_max), rng.gen_range(1..=d_max)))
        .collect();
    Ok(Instance::shortest_path(sink + 1, &arcs, 0, sink, budgets.0, budgets.1)?
        .with_name(format!("grid{rows}x{cols}_{c_max}-{d_max}_s{seed}")))
}

/// Synthetic stand-ins for the two knapsack benchmark families. Profits and
/// weights are uniform on `[1, 100]`, the capacity is half the total weight
/// and fortification is a cardinality constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KfgProfile {
    /// Interdiction costs uniform on `[1, 10]` and a budget uniform on
    /// `[6, 23]` (capped by the total cost).
    Trs,
    /// Interdiction costs uniform on `[1, 100]` and a budget of `id/11` of
    /// their total, so it grows with the instance id (1 to 10).
    Cclw(u8),
}

impl fmt::Display for KfgProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KfgProfile::Trs => f.write_str("trs"),
            KfgProfile::Cclw(id) => write!(f, "cclw{id}"),
        }
    }
}

impl FromStr for KfgProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "trs" {
            return Ok(KfgProfile::Trs);
        }
        match s.strip_prefix("cclw").map(str::parse::<u8>) {
            Some(Ok(id)) if (1..=10).contains(&id) => Ok(KfgProfile::Cclw(id)),
            _ => Err(Error::InvalidInstance(format!("unknown knapsack profile {s:?}"))),
        }
    }
}

pub fn generate_kfg(n: usize, seed: u64, fortify_budget: i64, profile: KfgProfile) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidInstance("knapsack game needs at least one item".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for _ in 0..n {
        d.push(rng.gen_range(1..=100));
        a.push(rng.gen_range(1..=100));
    }
    let capacity = a.iter().sum::<i64>() / 2;
    let (g, interdict_budget) = match profile {
        KfgProfile::Trs => {
            let g: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=10)).collect();
            let b = rng.gen_range(6..=23).min(g.iter().sum());
            (g, b)
        }
        KfgProfile::Cclw(id) => {
            let g: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=100)).collect();
            let b = g.iter().sum::<i64>() * i64::from(id) / 11;
            (g, b)
        }
    };
    Ok(
        Instance::knapsack(d, a, capacity, vec![1; n], g, fortify_budget, interdict_budget)?
            .with_name(format!("kfg{n}_{profile}_bf{fortify_budget}_s{seed}")),
    )
}

/// Tiny random games for oracle comparisons: between 4 and `max_n` assets
/// and budgets in `1..=3`. Shortest-path games are random digraphs that
/// contain an s-t path.
pub fn tiny_kfg(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.gen_range(4.min(max_n)..=max_n.max(2));
    let d: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
    let a: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=10)).collect();
    let capacity = rng.gen_range(0..=a.iter().sum::<i64>());
    let f: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
    let g: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
    Instance::knapsack(d, a, capacity, f, g, rng.gen_range(1..=3), rng.gen_range(1..=3)).expect("valid by construction")
}

pub fn tiny_spfg(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let max_n = max_n.max(4);
    loop {
        let nodes = rng.gen_range(3..=6usize);
        let m = rng.gen_range((nodes - 1).max(4).min(max_n)..=max_n);
        // a random s-t path first, so the sink is reachable
        let mut arcs = Vec::new();
        let mut at = 0;
        while at != nodes - 1 && arcs.len() < m {
            let next = rng.gen_range(at + 1..nodes);
            arcs.push((at, next));
            at = next;
        }
        if at != nodes - 1 {
            continue;
        }
        while arcs.len() < m {
            let t = rng.gen_range(0..nodes);
            let h = rng.gen_range(0..nodes);
            if t != h {
                arcs.push((t, h));
            }
        }
        let arcs: Vec<(usize, usize, i64, i64)> = arcs
            .into_iter()
            .map(|(t, h)| (t, h, rng.gen_range(1..=10), rng.gen_range(0..=10)))
            .collect();
        let bf = rng.gen_range(1..=3);
        let bi = rng.gen_range(1..=3);
        return Instance::shortest_path(nodes, &arcs, 0, nodes - 1, bf, bi).expect("connected by construction");
    }
}
