//! Configuration, seeded Monte Carlo realizations, parameter sweeps and
//! result files.

mod config;
mod output;
mod realization;
mod runner;

pub use config::{load_config, ExperimentConfig, Metric, Randomization, Solver};
pub use output::{emit_results, read_json_results, to_csv, to_json, OutputFormat, CSV_HEADER};
pub use realization::{draw_phases, draw_realization, run_rng};
pub use runner::{
    decode_point, run_monte_carlo, run_single, run_sweep, satcom_problem, solve_link, Comparison,
    ResultRecord, RunOutcome, SweepAxis, SweepSpec, START_POWER_FRACTION,
};
