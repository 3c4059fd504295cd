use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: tunnelcat::Error,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn numerical(context: impl Into<String>) -> impl FnOnce(tunnelcat::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }

    /// Process exit code: 2 for config problems, 3 for numerical failures,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
