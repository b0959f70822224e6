//! Manufactured examples, error measurement, parameter sweeps and the CLI.

mod cli;
mod config;
mod errors;
mod exact;
mod study;

pub use cli::cli_main;
pub use config::{parse_inv_h, Settings};
pub use errors::{compute_errors, compute_errors_fn, eoc, eoc_sequence, ErrorConvention, ErrorReport};
pub use exact::{exact_registry, ExactRegistry, ExactSolution};
pub use study::{
    betas_for_ratio, cells_for, fmt_sci4, run_convergence_study, run_mg_study, solve_problem, ConvergenceRow,
    ConvergenceTable, MgRow, MgTable, ProblemSpec, RunConfig, Solution, SolverChoice,
};
