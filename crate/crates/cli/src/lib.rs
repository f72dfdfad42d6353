//! Library side of the `eventum` experiment runner.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use error::CliError;
