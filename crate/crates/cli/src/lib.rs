//! Config-driven experiment runner for the `coordsim` library.

pub mod config;
pub mod error;
pub mod runner;

pub use config::{parse_config, ExperimentConfig, Kind};
pub use error::{exit_code, CliError};
pub use runner::{run, RunOutput};
