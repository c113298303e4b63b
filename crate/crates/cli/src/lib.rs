//! Scenario runner behind the `gift` binary.
//!
//! A scenario is a TOML file naming a problem and a list of commands; see
//! [`config`] for the format and [`runner::run_file`] for execution.

pub mod config;
pub mod error;
pub mod runner;
pub mod spec;

pub use error::CliError;
pub use runner::{run_file, CommandOutcome, Summary};
