//! Experiment runner: reads a TOML config, drives `recur-core`, writes CSV.

pub mod commands;
pub mod config;

pub use commands::{exit_code, Outcome};
pub use config::ExperimentConfig;
