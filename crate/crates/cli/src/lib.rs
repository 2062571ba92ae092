//! Library side of the `haarint` command-line tool: argument validation,
//! commands, validation suites and report formats.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod matrix_file;
pub mod report;
pub mod suites;

pub use commands::run;
pub use config::{Cli, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{CompareReport, Output, SuiteReport};
