use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] lyapexp::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 usage or validation, 3 resource budget, 4 numerics failure, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(lyapexp::Error::Budget(_)) => 3,
            CliError::Core(lyapexp::Error::Domain { .. }) => 2,
            CliError::Core(_) => 4,
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}
