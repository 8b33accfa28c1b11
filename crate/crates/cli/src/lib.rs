//! Library backing the `radbound` binary: argument model, report document
//! assembly, renderers, and the five subcommand runners. Everything except
//! the timestamp is deterministic for a fixed configuration and seed.

pub mod commands;
pub mod config;
pub mod document;

pub use commands::{run, CliError, RunOutcome};
