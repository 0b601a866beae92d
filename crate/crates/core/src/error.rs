use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SrfeError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("combinatorial budget exceeded: {requested} features requested, cap is {cap}")]
    CombinatorialBudget { requested: u128, cap: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("infeasible constraint: radius {radius:e} is below the minimum achievable residual {min_residual:e}")]
    Infeasible { radius: f64, min_residual: f64 },

    #[error("relative error undefined: reference values have zero norm")]
    ZeroReference,

    #[error("function is not in the bounded rho-norm class: {0}")]
    UnboundedRhoNorm(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = SrfeError> = std::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> SrfeError {
    SrfeError::Config(msg.into())
}

pub(crate) fn shape_err(msg: impl Into<String>) -> SrfeError {
    SrfeError::Shape(msg.into())
}
