use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("division by zero in GF(2^{0})")]
    DivisionByZero(u32),
    #[error("infeasible code: {0}")]
    InfeasibleCode(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("scale error: {0}")]
    Scale(String),
    #[error("infeasible design: {0}")]
    Infeasible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
