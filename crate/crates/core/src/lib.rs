//! Exact branch-and-cut for 0-1 fortification games.

pub mod config;
pub mod error;
pub mod io;
pub mod master;
pub mod mip;
pub mod model;
pub mod oracle;
pub mod recourse;
pub mod separation;
pub mod strengthen;

pub use config::{Settings, SolverConfig};
pub use error::{Error, Result};
pub use master::{
    evaluate_cut, initial_cuts, is_violated, recover_attacker_response, solve_fortification, CutScope,
    FortificationCut, SolveResult, SolveStats, SolveStatus, SolveTrace, Strengthening,
};
pub use model::{
    canonicalize, FortificationStrategy, Instance, InterdictionStrategy, NetworkArc, RecourseKind, RecourseSpec,
    Selection, Sense,
};
pub use oracle::{bruteforce_fortification, bruteforce_interdiction, Oracle};
pub use recourse::{recourse_dual_bound, solve_recourse_exact, solve_recourse_greedy, RecourseResult};
pub use separation::{
    greedy_interdiction, separate, solve_interdiction, strengthen_interdiction_cut, InterdictionCut, RecoursePool,
    SeparationOutcome,
};
pub use strengthen::{adaptive_disable, combine, strengthen_enumerative, strengthen_lower_bound, EnumerationGate};
