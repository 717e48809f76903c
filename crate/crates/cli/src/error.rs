use serde_json::{json, Value};

/// Failure of a CLI run, mapped onto the exit-code contract:
/// 1 verification failure, 2 non-convergence or undecidable, 3 input error.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qmod::Error),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("cache storage: {0}")]
    Cache(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Instance(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qmod::Error as E;
        match self {
            CliError::Verification(_) | CliError::Core(E::Verification(_)) => 1,
            CliError::Core(
                E::NonConvergence { .. }
                | E::Undecidable { .. }
                | E::NonStabilization { .. }
                | E::InsufficientPrecision(_)
                | E::SearchExhausted(_)
                | E::Indeterminate { .. },
            ) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "verification",
            2 => "undecided",
            _ => "input",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() })
    }
}
