//! Experiment runner for `fracprog-core`: TOML configs, CSV traces and
//! summaries, and the property suites behind `fracprog verify`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use experiment::{run_experiment, run_sweep, StdClock};
