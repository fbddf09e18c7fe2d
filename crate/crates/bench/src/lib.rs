//! Fixed benchmark instances shared by the criterion benches in `benches/`.

use fortify_core::io::{generate_grid, generate_kfg, KfgProfile};
use fortify_core::{canonicalize, Instance, InterdictionStrategy, Selection};

/// Grid games small enough for criterion to repeat many times, one per
/// budget pair.
pub fn grid_games() -> Vec<Instance> {
    [(3, 3), (4, 5)]
        .into_iter()
        .map(|b| {
            let g = generate_grid(6, 6, 10, 10, b, 11).expect("valid grid");
            let name = format!("{}_bf{}_bi{}", g.name, b.0, b.1);
            g.with_name(name)
        })
        .collect()
}

pub fn knapsack_games() -> Vec<Instance> {
    [3, 5]
        .into_iter()
        .map(|bf| generate_kfg(15, 7, bf, KfgProfile::Trs).expect("valid knapsack game"))
        .collect()
}

/// A canonical 10x10 grid with a fixed attack on every seventh arc, for
/// timing the recourse and separation oracles.
pub fn recourse_case() -> (Instance, InterdictionStrategy) {
    let g = canonicalize(&generate_grid(10, 10, 10, 10, (3, 3), 1).expect("valid grid")).expect("canonical");
    let x = Selection::from_bools((0..g.n()).map(|i| i % 7 == 0).collect());
    (g, x)
}
