//! Library half of the `fixpoint` command-line tool: config ingestion,
//! the four workflows (iterate, classify, compare, verify) and report
//! emission. The binary in `main.rs` is a thin argument-parsing shell.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{execute, CliError, Command, ExitKind};
