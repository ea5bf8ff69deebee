use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Cromwell violation: {0}")]
    CromwellViolation(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("method unsupported: {0}")]
    MethodUnsupported(String),

    #[error("enumeration budget exceeded: {terms} terms requested, budget is {budget}")]
    BudgetExceeded { terms: u128, budget: u128 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("phase error: {0}")]
    PhaseError(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
