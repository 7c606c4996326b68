use std::path::PathBuf;

use vinecop::VineError;

/// Process exit status for each failure class.
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] VineError),
}

impl CliError {
    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Data {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Io { .. } | Self::Data { .. } => EXIT_DATA,
            Self::Core(e) => match e {
                VineError::Domain { .. }
                | VineError::Degenerate(_)
                | VineError::DimensionMismatch { .. }
                | VineError::MissingParent { .. }
                | VineError::InvalidStructure(_)
                | VineError::Schema { .. }
                | VineError::Shape { .. }
                | VineError::Json(_) => EXIT_DATA,
                VineError::Parameter { .. }
                | VineError::TauRange { .. }
                | VineError::Convergence { .. }
                | VineError::NonFiniteGradient
                | VineError::Divergence(_)
                | VineError::ZeroReference(_)
                | VineError::EmptyActionSpace { .. } => EXIT_NUMERIC,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
