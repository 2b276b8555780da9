//! Config-driven experiment runner: parallel seeded chains, metric CSVs,
//! exact enumeration and parameter sweeps.

pub mod ablation;
pub mod config;
pub mod error;
pub mod model;
pub mod runner;

pub use ablation::{ablation, AblationRow};
pub use config::{ExperimentConfig, Metric, ModelConfig, SamplerName};
pub use error::CliError;
pub use runner::{enumerate, execute, run, RunReport};
