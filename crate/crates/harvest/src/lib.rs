//! Experiment runner around `noiseharvest-core`: JSON configs, CSV and JSON outputs, and the
//! `noiseharvest` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;

pub use config::ExperimentConfig;
pub use error::{HarvestError, Result};
