//! Scenario files, reports and subcommands behind the `optiplace` binary.

pub mod commands;
pub mod report;
pub mod scenario;
