//! Configuration-driven front end for the `kreinsv` crate.

pub mod checks;
pub mod commands;
pub mod config;

pub use commands::{run, Command, Failure, Outcome, Output};
pub use config::ExperimentConfig;
