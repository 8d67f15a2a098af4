//! Run configuration, experiment orchestration and report files.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_with, DomainEntry, Overrides, RunConfig};
pub use run::{emit_reports, plan_jobs, plot_data, results_table, run_experiments, Job, ResultRow, RunOutput, COLUMNS};
