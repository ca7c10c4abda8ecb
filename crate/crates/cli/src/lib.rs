//! Scenario files, batch reports and the `qsum` subcommands.

pub mod commands;
mod error;
pub mod report;
pub mod scenario;

pub use error::{CliError, Result};
