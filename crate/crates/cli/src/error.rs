use serde::Serialize;
use serde_json::Value;

pub const EXIT_STAGE_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Invalid or incomplete configuration, detected before any output.
    Config,
    /// A stage could not complete.
    Stage,
}

/// Printed to stderr as one JSON object.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<Value>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            stage: None,
            message: message.into(),
            details: Vec::new(),
        }
    }

    pub fn stage(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Stage,
            stage: None,
            message: message.into(),
            details: Vec::new(),
        }
    }

    pub fn with_details<T: Serialize>(mut self, details: &[T]) -> Self {
        self.details = details
            .iter()
            .map(|d| serde_json::to_value(d).expect("serializable detail"))
            .collect();
        self
    }

    pub fn in_stage(mut self, stage: &str) -> Self {
        self.stage.get_or_insert_with(|| stage.to_string());
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Stage => EXIT_STAGE_FAILURE,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::stage(e.to_string())
    }
}
