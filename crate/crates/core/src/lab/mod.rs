//! Experiment orchestration: configuration, initial data, coupled runs,
//! acceptance verdicts and file output.

pub mod acceptance;
pub mod config;
pub mod emit;
pub mod experiment;
pub mod perturb;
pub mod studies;

pub use acceptance::{acceptance_report, AcceptanceReport, Thresholds, Verdict};
pub use config::{load_config, Config};
pub use emit::emit;
pub use experiment::{run_experiment, run_with_profile, DiagnosticsRecord, ExperimentResult};
pub use perturb::make_initial;
