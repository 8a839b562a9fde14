//! Experiment configuration, convergence studies and the acceptance suite.

mod acceptance;
mod config;
mod study;

pub use acceptance::{criterion_ids, run_acceptance_suite, AcceptanceOptions, AcceptanceSummary, CriterionResult};
pub use config::{Engine, ExperimentConfig, GraphSpec, InitialData, ModelSpec};
pub use study::{
    continuous_alpha_table, fit_log_slope, run_convergence_study, write_report, ContinuousReference, ConvergenceReport,
    ReportRow,
};
