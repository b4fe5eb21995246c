use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {message}")]
    Config { message: String, key: Option<String> },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: lhsl_core::Error,
    },

    #[error("io: {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn from_core_in(context: &str, source: lhsl_core::Error) -> Self {
        CliError::Core {
            context: context.to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Usage(_) => "usage",
            CliError::Core { .. } => "solver",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config { .. } => 3,
            CliError::Core { .. } => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub fn to_json(&self) -> String {
        let key = match self {
            CliError::Config { key, .. } => key.clone(),
            _ => None,
        };
        let message = match self {
            CliError::Config { message, .. } | CliError::Usage(message) => message.clone(),
            other => other.to_string(),
        };
        json!({ "error": { "kind": self.kind(), "key": key, "message": message } }).to_string()
    }
}
