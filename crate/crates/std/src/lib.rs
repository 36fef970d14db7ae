//! Experiment runner, file formats and plots for `besov-robust`.
//!
//! The `besov-robust` binary drives five commands (`estimate`, `risk-sweep`,
//! `rate-check`, `breakdown`, `adversary`) from JSON configs or named presets.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod run;
pub mod svg;
pub mod sweep;

pub use config::{preset, ExperimentConfig, PRESET_NAMES};
pub use error::CliError;
pub use run::{run, RunOptions, RunOutcome};
