//! Command-line front end: config loading, input wiring and the subcommands
//! behind the `trs` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod inputs;
pub mod provenance;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
