//! Config-driven front end for `pdx-core`.
//!
//! A run reads a TOML [`RunConfig`], executes one experiment (or a resolution
//! sweep of one), and produces a [`VerificationReport`] with labelled gates.
//! Reports are written as versioned JSON and as plot-ready CSV tables.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{parse_config, parse_config_with, ExperimentKind, ReportFormat, RunConfig};
pub use error::CliError;
pub use experiments::{run_command, run_experiment, Command};
pub use report::{emit_report, ExperimentResult, Gate, Table, VerificationReport, FORMAT_VERSION, REPORT_SCHEMA};

/// Exit status for a finished run.
pub fn exit_code(report: &VerificationReport) -> u8 {
    if report.passed {
        0
    } else {
        2
    }
}
