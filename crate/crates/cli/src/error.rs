use std::path::PathBuf;

/// Pipeline failure, tagged with the stage it happened in.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: input schema error: {message}")]
    Schema { stage: &'static str, message: String },
    #[error("{stage}: internal invariant violated: {message}")]
    Invariant { stage: &'static str, message: String },
    #[error("{stage}: {path}: {source}")]
    Io {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Schema { .. } => 3,
            CliError::Invariant { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn schema(stage: &'static str, message: impl ToString) -> Self {
        CliError::Schema {
            stage,
            message: message.to_string(),
        }
    }

    pub(crate) fn invariant(stage: &'static str, message: impl ToString) -> Self {
        CliError::Invariant {
            stage,
            message: message.to_string(),
        }
    }

    pub(crate) fn io(stage: &'static str, path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { stage, path, source }
    }
}
