use crate::config::ConfigError;

/// Failure of a scenario run, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Physics { context: String, source: eitcool_core::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    pub fn physics(context: impl Into<String>, source: eitcool_core::Error) -> Self {
        RunError::Physics { context: context.into(), source }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        RunError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// 2 for configuration problems, 3 for physics or convergence failures,
    /// 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Physics { .. } => 3,
            RunError::Io { .. } => 1,
        }
    }
}

/// Attaches scenario context to core results.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, RunError>;
}

impl<T> Context<T> for eitcool_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, RunError> {
        self.map_err(|e| RunError::physics(what(), e))
    }
}
