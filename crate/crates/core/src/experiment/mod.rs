//! Seeded experiment runner.
//!
//! An [`ExperimentConfig`] names an algorithm, an instance and a number of
//! runs. [`run_experiment`] produces one [`RunRow`] per run and
//! [`aggregate`] folds them into [`SummaryRow`]s. Both tables are written as
//! CSV with a header row and LF line endings; empty cells mark fields that
//! do not apply to the algorithm.

mod config;
mod preset;
mod run;
mod summary;

pub use config::{Algorithm, BuiltInstance, ExperimentConfig, InstanceSpec, SolverKind};
pub use preset::{preset, PresetOptions, DESK_MAX_N, FIG1_SIZES, FIG3_KS};
pub use run::{read_runs, run_experiment, run_subset, write_runs, RunRow, RUN_COLUMNS};
pub use summary::{aggregate, mean_stderr, read_summary, write_summary, Summary, SummaryRow};
