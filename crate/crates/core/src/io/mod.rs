//! Instance files, generators and the benchmark CSV.

pub mod bench;
pub mod dimacs;
pub mod formats;
pub mod generate;

pub use bench::{write_bench_csv, BenchRow};
pub use dimacs::{parse_dimacs_road, parse_dimacs_road_str, RoadGame, ROAD_DELAY};
pub use formats::{
    parse_instance, parse_instance_str, parse_kfg, parse_kfg_str, parse_spfg, parse_spfg_str, write_instance,
    write_instance_file,
};
pub use generate::{generate_grid, generate_kfg, tiny_kfg, tiny_spfg, KfgProfile, GRID_BUDGETS};
