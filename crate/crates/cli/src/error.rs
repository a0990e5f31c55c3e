use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown key `{key}` in {section}")]
    UnknownKey { key: String, section: String },

    #[error("missing physics parameter `{0}` (no defaults are filled for physics parameters)")]
    MissingParameter(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Physics(#[from] giant_atom::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::UnknownKey { .. } => "unknown_key",
            Self::MissingParameter(_) => "missing_parameter",
            Self::InvalidValue { .. } => "invalid_value",
            Self::Config(_) => "config",
            Self::Physics(_) => "physics",
            Self::Io(_) => "io",
            Self::Csv(_) => "io",
        }
    }

    /// Process exit status: 2 for configuration problems, 1 for failures while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::UnknownKey { .. } | Self::MissingParameter(_) | Self::InvalidValue { .. } | Self::Config(_) => 2,
            _ => 1,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        let mut record = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            Self::UnknownKey { key, section } => {
                record["key"] = json!(key);
                record["section"] = json!(section);
            }
            Self::MissingParameter(key) | Self::InvalidValue { key, .. } => record["key"] = json!(key),
            _ => {}
        }
        json!({ "error": record }).to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
