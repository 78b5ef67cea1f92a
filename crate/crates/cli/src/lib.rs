//! Experiment runner behind the `kdac` binary.

pub mod config;
pub mod error;
pub mod run;

pub use config::{BenchConfig, ExperimentConfig, MaskSpec};
pub use error::{CliError, CliResult};
pub use run::MetricsRow;
