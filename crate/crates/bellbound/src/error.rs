use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<bellbound_core::states::StateError> for CliError {
    fn from(e: bellbound_core::states::StateError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<bellbound_core::bell::BellError> for CliError {
    fn from(e: bellbound_core::bell::BellError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<bellbound_core::npa::NpaError> for CliError {
    fn from(e: bellbound_core::npa::NpaError) -> Self {
        use bellbound_core::npa::NpaError;
        match e {
            NpaError::Solver { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
