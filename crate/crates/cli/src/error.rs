use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: dipolar_spin_core::Error,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("{failed} regression criteria failed")]
    Regression { failed: usize },
}

impl CliError {
    pub fn config(key: &str, message: impl std::fmt::Display) -> Self {
        CliError::Config(format!("`{key}`: {message}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Regression { .. } => 4,
        }
    }
}

/// Attaches run context to a core error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for dipolar_spin_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { context: what(), source })
    }
}
