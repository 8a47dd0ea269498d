use std::process::ExitCode;

use quasibell_core::QuasiBellError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Numeric(#[from] QuasiBellError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error("counterexample found: {0}")]
    Counterexample(String),
    #[error("evaluation budget exhausted: {0}")]
    BudgetExhausted(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 0 success, 2 invalid input, 3 counterexample, 4 budget exhausted.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Counterexample(_) => 3,
            CliError::BudgetExhausted(_) => 4,
            _ => 2,
        }
    }
}
