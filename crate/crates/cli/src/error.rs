use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Core(#[from] subexp_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(String),
    #[error("report re-ingestion mismatch: {0}")]
    RoundTrip(String),
}

/// Machine-readable error body.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// `2` schema, `3` regime or scope, `4` smoothness, `1` anything else.
    pub fn exit_code(&self) -> i32 {
        use subexp_core::Error as E;
        match self {
            CliError::Schema { .. } => 2,
            CliError::Core(E::OutOfScope(_) | E::CaseAConditionViolated(_) | E::UnsupportedSign(_)) => 3,
            CliError::Core(E::InsufficientSmoothness { .. }) => 4,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "schema",
            3 => "regime",
            4 => "smoothness",
            _ => "other",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            path: match self {
                CliError::Schema { path, .. } => Some(path.clone()),
                _ => None,
            },
        }
    }
}
