use thiserror::Error;

/// Errors surfaced by the runner, each mapped to a stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] coordsim::Error),
}

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INFEASIBLE_EXTENSION: i32 = 3;
    pub const DIMENSION_CAP: i32 = 4;
    pub const INFEASIBLE_ENTANGLED: i32 = 5;
}

impl CliError {
    pub fn validation(field: &str, reason: &str) -> Self {
        CliError::Validation { field: field.to_string(), reason: reason.to_string() }
    }

    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => exit_code::CONFIG,
            CliError::Core(coordsim::Error::InfeasibleExtension { .. }) => exit_code::INFEASIBLE_EXTENSION,
            CliError::Core(coordsim::Error::DimensionCap { .. } | coordsim::Error::ShapeOverflow { .. }) => {
                exit_code::DIMENSION_CAP
            }
            CliError::Io(_) | CliError::Core(_) => exit_code::OTHER,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
