use srfe::SrfeError;
use thiserror::Error;

/// Failure classes, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Internal(_) => 5,
        }
    }
}

impl From<SrfeError> for CliError {
    fn from(e: SrfeError) -> Self {
        let msg = e.to_string();
        match e {
            SrfeError::Config(_)
            | SrfeError::CombinatorialBudget { .. }
            | SrfeError::Unknown { .. }
            | SrfeError::UnboundedRhoNorm(_) => CliError::Config(msg),
            SrfeError::Shape(_) | SrfeError::ZeroReference => CliError::Data(msg),
            SrfeError::Infeasible { .. } => CliError::Infeasible(msg),
            SrfeError::Numerical(_) => CliError::Internal(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
