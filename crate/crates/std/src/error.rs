use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// The configuration or a module precondition was violated.
    Config,
    Io,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    /// Error variant of the core library, when the error came from there.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub message: String,
}

pub fn config_error(message: impl Into<String>) -> CliError {
    CliError { kind: ErrorKind::Config, variant: None, message: message.into() }
}

pub fn io_error(context: &str, e: impl fmt::Display) -> CliError {
    CliError { kind: ErrorKind::Io, variant: None, message: format!("{context}: {e}") }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "error": self })).expect("errors serialize")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<besov_robust::Error> for CliError {
    fn from(e: besov_robust::Error) -> Self {
        CliError { kind: ErrorKind::Config, variant: Some(e.code().to_string()), message: e.to_string() }
    }
}
