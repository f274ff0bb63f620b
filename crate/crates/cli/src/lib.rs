//! Batch runner for the `cyclic` command line tool.
//!
//! The binary is a thin wrapper; everything it prints is produced here so the
//! integration tests can check it without spawning processes.

pub mod commands;
pub mod sweep;

pub use sweep::{Record, Report, Route, RunConfig};
