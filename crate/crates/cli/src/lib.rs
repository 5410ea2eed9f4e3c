//! Scenario runner behind the `arum` binary.

pub mod error;
pub mod run;
pub mod scenario;

pub use error::{exit, CliError, Result, EXIT_CODE_HELP};
pub use run::{run_scenario_file, validate_scenario_file, Artifact, RunOptions, RunOutcome, MANIFEST_NAME};
pub use scenario::{Analysis, Arithmetic, Scenario, SCENARIO_SCHEMA};
