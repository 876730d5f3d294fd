//! Configuration loading, experiment orchestration and CSV output for the
//! `mecsched` command-line tool.

pub mod config;
pub mod error;
pub mod experiment;
pub mod frontier;
pub mod output;

pub use config::{load_config, parse_config, ExperimentConfig, SweepAxis};
pub use error::CliError;
