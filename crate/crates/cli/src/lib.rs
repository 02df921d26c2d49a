//! Experiment drivers for the railray channel simulator: scenario
//! configuration, the bundled canyon preset, CSV export and the `run`,
//! `sweep`, `scatter-study`, `bench` and `validate-scene` commands.

// Negated comparisons are used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod preset;

pub use config::{Overrides, ScenarioConfig};
pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};
