use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;
use torpid_core::bounds::BoundsError;
use torpid_core::exactgibbs::ExactError;
use torpid_core::glauber::ChainError;
use torpid_core::rho::RhoError;
use torpid_core::{ColoringError, TorusError};

/// Exit status: 1 for a failed hard check, 2 for bad parameters, 3 for a
/// budget refusal, 4 for i/o.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    InvalidParams(String),
    #[error("{0}")]
    Budget(String),
    #[error("suite {suite} failed: {message}")]
    VerifyFailed { suite: String, message: String, witness: Value },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed { .. } => 1,
            CliError::InvalidParams(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::InvalidParams(_) => "invalid_params",
            CliError::Budget(_) => "budget",
            CliError::VerifyFailed { .. } => "verify_failed",
            CliError::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::VerifyFailed { suite, witness, .. } = self {
            v["suite"] = json!(suite);
            v["witness"] = witness.clone();
        }
        v
    }
}

impl From<TorusError> for CliError {
    fn from(e: TorusError) -> Self {
        match e {
            TorusError::OverBudget { .. } => CliError::Budget(e.to_string()),
            _ => CliError::InvalidParams(e.to_string()),
        }
    }
}

impl From<RhoError> for CliError {
    fn from(e: RhoError) -> Self {
        CliError::InvalidParams(e.to_string())
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::FamilyTooLarge => CliError::Budget(e.to_string()),
            _ => CliError::InvalidParams(e.to_string()),
        }
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::OverBudget { .. } | ExactError::CapReached { .. } => CliError::Budget(e.to_string()),
            ExactError::Chain(c) => c.into(),
            other => CliError::InvalidParams(other.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::InvalidParams(e.to_string())
    }
}

impl From<ColoringError> for CliError {
    fn from(e: ColoringError) -> Self {
        match e {
            ColoringError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::InvalidParams(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn witness<T: Serialize>(w: &T) -> Value {
    serde_json::to_value(w).unwrap_or(Value::Null)
}
