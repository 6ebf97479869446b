use std::path::PathBuf;

/// Errors raised by the harness. Core errors keep their own category.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] covbeam_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        HarnessError::Format { path: path.into(), message: message.to_string() }
    }

    /// Stable, machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            HarnessError::Core(e) => e.category(),
            HarnessError::Io { .. } => "io",
            HarnessError::Config(_) => "config",
            HarnessError::Format { .. } => "format",
        }
    }

    /// Process exit code for the category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "invalid-input" | "config" => 2,
            "io" | "format" => 3,
            "infeasible-scenario" | "degenerate-geometry" => 4,
            _ => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
