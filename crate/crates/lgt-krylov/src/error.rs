use lgt_krylov_core::Error as CoreError;

/// Failures surfaced by the runner, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 config, 3 capacity, 4 numerical, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Numerical(_) => 4,
            _ => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } | CoreError::Hypothesis { .. } => CliError::Config(e.to_string()),
            CoreError::Capacity { .. } => CliError::Capacity(e.to_string()),
            CoreError::InsufficientPoints { .. } | CoreError::MissingMoments { .. } => CliError::Input(e.to_string()),
            CoreError::MomentOverflow { .. } | CoreError::ZeroMoment { .. } | CoreError::NoConvergence { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
