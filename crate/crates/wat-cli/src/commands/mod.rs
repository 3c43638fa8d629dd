//! Subcommand implementations. Each returns the process exit code;
//! `Err` means a configuration or I/O failure (exit 1).

pub mod classify;
pub mod cluster;
pub mod convert;
pub mod report;
pub mod validate_corpus;
