//! Batch front-end over the design library: scenario configs in TOML,
//! plot-ready CSV and JSON artifacts out.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_bench, cmd_design, cmd_eval, cmd_oracle, EvalInputs};
pub use config::{Mode, ScenarioConfig};
pub use error::CliError;
