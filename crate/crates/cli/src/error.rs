use thiserror::Error;

use fractube_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    OracleMismatch(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                CoreError::HypothesisViolation { .. } | CoreError::CompatibilityNotDeclared => 3,
                CoreError::RatioOutOfRange(_)
                | CoreError::TooFewMaps(_)
                | CoreError::TrivialAttractor { .. }
                | CoreError::AmbiguousLattice { .. }
                | CoreError::InvalidLattice(_)
                | CoreError::NonPositiveVolume { .. }
                | CoreError::NonMonotone { .. }
                | CoreError::EpsOutOfRange { .. }
                | CoreError::NotLattice
                | CoreError::InvalidGeometry(_)
                | CoreError::InvalidInput(_) => 2,
                _ => 1,
            },
            CliError::OracleMismatch(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}
