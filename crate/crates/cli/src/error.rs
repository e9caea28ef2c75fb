//! CLI error surface: machine-readable JSON on stderr, nonzero exit.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing stage '{stage}': {hint}")]
    MissingStage { stage: String, hint: String },

    #[error("stale artifact {path}: built with config {found}, current is {expected}")]
    StaleArtifact {
        path: String,
        found: String,
        expected: String,
    },

    #[error("output directory is locked by another process ({0}); remove the lock file if no run is active")]
    LockHeld(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Core(#[from] wolfcast_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::MissingStage { .. } => "missing_stage",
            CliError::StaleArtifact { .. } => "stale_artifact",
            CliError::LockHeld(_) => "lock_held",
            CliError::InvalidArgument(_) => "invalid_argument",
            CliError::Core(_) => "core",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorJson {
            error: self.kind(),
            message: self.to_string(),
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }

    pub fn missing_stage(stage: &str, hint: impl Into<String>) -> Self {
        CliError::MissingStage {
            stage: stage.to_string(),
            hint: hint.into(),
        }
    }
}
