use std::path::PathBuf;

use pathcount_core::Error;

/// Process exit statuses. Nothing else is ever returned.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const PROPERTY_FAILURE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const EVALUATION: i32 = 3;
    pub const CAPACITY: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Flag(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                Error::Capacity { .. } => exit::CAPACITY,
                Error::DepthExceeded { .. }
                | Error::EmptyBranch(_)
                | Error::Normalization(_)
                | Error::Audit { .. } => exit::EVALUATION,
                Error::Parse { .. }
                | Error::Format { .. }
                | Error::Parameter(_)
                | Error::KindMismatch(_)
                | Error::Io { .. } => exit::PARSE,
            },
            CliError::Config { .. } | CliError::Flag(_) | CliError::Io { .. } => exit::PARSE,
        }
    }
}
