//! Command implementations behind the `segpipe` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
