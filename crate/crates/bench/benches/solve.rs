use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fortify_bench::{grid_games, knapsack_games, recourse_case};
use fortify_core::{
    greedy_interdiction, solve_fortification, solve_interdiction, solve_recourse_exact, Selection, SolverConfig,
};

fn full_solves(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for g in grid_games() {
        for s in ["-", "IBEG"] {
            let config = SolverConfig::new(s.parse().unwrap());
            group.bench_with_input(BenchmarkId::new(&g.name, s), &g, |b, g| {
                b.iter(|| solve_fortification(black_box(g), &config).unwrap())
            });
        }
    }
    for k in knapsack_games() {
        for s in ["-", "BEG"] {
            let config = SolverConfig::new(s.parse().unwrap());
            group.bench_with_input(BenchmarkId::new(&k.name, s), &k, |b, k| {
                b.iter(|| solve_fortification(black_box(k), &config).unwrap())
            });
        }
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let (g, x) = recourse_case();
    let none = Selection::from_bools(vec![false; g.n()]);
    c.bench_function("recourse/dijkstra 10x10", |b| {
        b.iter(|| solve_recourse_exact(black_box(&g), black_box(&x)))
    });
    c.bench_function("separation/greedy 10x10", |b| {
        b.iter(|| greedy_interdiction(black_box(&g), &none))
    });
    let mut group = c.benchmark_group("separation");
    group.sample_size(10);
    group.bench_function("exact 10x10", |b| b.iter(|| solve_interdiction(black_box(&g), &none)));
    group.finish();
}

criterion_group!(benches, full_solves, oracles);
criterion_main!(benches);
