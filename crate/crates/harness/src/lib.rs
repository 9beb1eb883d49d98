//! Experiment driver for the multi-agent learners: configuration files,
//! seeded runs, grid search, probing saved agents and report aggregation.

pub mod artifacts;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod grid;
pub mod plot;
pub mod probe;
pub mod report;
pub mod run;
pub mod stats;

pub use config::{ExperimentConfig, ProbeSettings, ReportSettings};
pub use error::{HarnessError, Result};
pub use run::{run, RunSummary, SeedFailure, SeedSummary};
