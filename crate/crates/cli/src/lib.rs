//! Experiment runner for the tree learners in `mhdeoct`: repeated seeded
//! splits, optional penalty tuning and report emission.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{AlphaSpec, ExperimentConfig, Method, ReportFormat};
pub use experiment::{run_experiment, train, tune_alpha, Trained};
pub use report::{emit_report, RepetitionReport, RunReport, Summary};
