//! Experiment orchestration: configuration, canned scenarios and artifacts on disk.

pub mod config;
pub mod output;
pub mod run;
pub mod scenarios;
pub mod snapshot;

pub use config::{DiagnosticSpec, ExperimentConfig, PartitionSource, SolverConfig, CONFIG_VERSION};
pub use run::{exit_code, run_experiment, RunOutcome, RunStatus, Summary};
pub use scenarios::{collision, scenario, SCENARIOS};
