//! Experiment runner for `lgt-krylov-core`: TOML configuration with
//! environment overrides, CSV and text file formats, parallel noise sweeps,
//! and the `model-info`, `sweep`, `resources` and `fit` commands.

pub mod commands;
pub mod config;
mod error;
pub mod formats;
pub mod sweep;

pub use error::{CliError, CliResult};
