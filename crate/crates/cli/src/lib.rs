//! Scenario-file front end for the `fluxlab` library.

pub mod config;
pub mod scenarios;

use std::fs;
use std::path::Path;

pub use config::{validate, ScenarioConfig, ScenarioKind, ValidationError};
pub use scenarios::{constants_json, run, RunOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", join_lines(.0))]
    Validation(Vec<ValidationError>),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] fluxlab::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

fn join_lines(errors: &[ValidationError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Input(_) => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Output(_) => EXIT_IO,
        }
    }
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    validate(&text).map_err(CliError::Validation)
}

/// Loads, validates and runs a scenario file. Relative paths inside the
/// file resolve against the file's own directory.
pub fn run_file(path: &Path) -> Result<RunOutcome, CliError> {
    let config = load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    run(&config, base)
}
