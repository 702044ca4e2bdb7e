//! Scenario files, suite runner and report/window export for `reflectpos`.

pub mod export;
pub mod report;
pub mod run;
pub mod scenario;

use thiserror::Error;

pub use report::{Check, Report, Status};
pub use run::{run_scenario, RunOptions};
pub use scenario::{load_scenario, parse_scenario, Scenario, SUITES};

/// Environment variable naming the default report directory.
pub const OUT_DIR_VAR: &str = "REFLECTPOS_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid scenario at `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}
