use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] iqc_core::Error),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// Process exit status: 1 failed check, 2 usage, configuration or file
    /// access, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } | CliError::Csv(_) => 2,
            CliError::Core(_) => 3,
        }
    }
}
