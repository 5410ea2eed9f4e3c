use arum_core::Error as CoreError;
use thiserror::Error;

/// Exit codes, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const ARGMAX_TIE: i32 = 4;
    pub const INFEASIBLE: i32 = 5;
    pub const NO_K_MAXIMAL_POINT: i32 = 6;
    pub const FULL_CONSIDERATION: i32 = 7;
    pub const IO: i32 = 8;
}

pub const EXIT_CODE_HELP: &str = "\
Exit codes:
  0  success
  2  parse error (malformed JSON or number)
  3  validation error (bad scenario, model, grid or parameters)
  4  argmax tie: an atom has two maximisers at some utility point
  5  infeasible: the atom family cannot reproduce the field
  6  no k-maximal point in the grid
  7  full consideration: every atom already considers k
  8  I/O error";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Analysis(CoreError),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Io { .. } => exit::IO,
            CliError::Analysis(e) => match e {
                CoreError::ArgmaxTie { .. } => exit::ARGMAX_TIE,
                CoreError::Infeasible => exit::INFEASIBLE,
                CoreError::NoKMaximalPoint { .. } => exit::NO_K_MAXIMAL_POINT,
                CoreError::FullConsideration { .. } => exit::FULL_CONSIDERATION,
                CoreError::Parse(_) => exit::PARSE,
                CoreError::NotCartesianProduct | CoreError::DimensionMismatch { .. } | CoreError::Invalid(_) => {
                    exit::VALIDATION
                }
            },
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parse(m) => CliError::Parse(m),
            CoreError::Invalid(m) => CliError::Validation(m),
            CoreError::DimensionMismatch { .. } | CoreError::NotCartesianProduct => CliError::Validation(e.to_string()),
            other => CliError::Analysis(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
