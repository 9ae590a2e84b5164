//! Command-line front end for the OLU verifications and experiments.
//!
//! [`jobs`] holds the computations, [`criteria`] the pass/fail judgements,
//! [`commands`] the file-emitting subcommands. Exit statuses follow
//! [`CliError::exit_code`]: 0 success, 2 config, 3 failed check, 4 I/O.

pub mod commands;
pub mod config;
pub mod criteria;
pub mod error;
pub mod jobs;
pub mod manifest;

pub use error::{CliError, CliResult};
