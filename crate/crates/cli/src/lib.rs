//! Command-line front end: config ingestion, run orchestration, persistence
//! and analysis export.

pub mod canonical;
pub mod commands;
pub mod config;
pub mod error;
pub mod eventlog;

pub use error::CliError;
