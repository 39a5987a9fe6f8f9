//! Experiment harness: scenario configs, grid runners and table output for
//! the `hdfd` command.

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

pub use config::{load_config, RawConfig, ScenarioName, ScenarioSpec};
pub use error::{CliError, Result};
pub use output::{emit, render, Format, Table, Value};
pub use scenarios::{cell_config, run_scenario, turning_point};
