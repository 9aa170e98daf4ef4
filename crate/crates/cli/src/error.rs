use ndgi_core::OpticsError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Numeric(OpticsError),
    #[error("{failed} of {total} criteria failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Numeric(_) => 3,
        }
    }

    /// Extra advice printed after the message.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Numeric(OpticsError::SamplingViolation { .. }) => Some(
                "increase the grid size (grid.n) or the pitch (grid.pitch), or shorten the propagation distance",
            ),
            CliError::Numeric(OpticsError::Unresolvable { .. }) => {
                Some("reduce grid.pitch or weaken the turbulence (turbulence.cn2)")
            }
            _ => None,
        }
    }
}

impl From<OpticsError> for CliError {
    fn from(e: OpticsError) -> Self {
        match e {
            OpticsError::InvalidParams(_)
            | OpticsError::InvalidField(_)
            | OpticsError::ShapeMismatch { .. }
            | OpticsError::InsufficientSamples { .. }
            | OpticsError::UnknownAxis(_) => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
