use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}, column {col}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{0}")]
    Model(#[from] dpca::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 usage, 3 data or I/O, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        use dpca::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(e) if e.is_numerical() => 4,
            CliError::Model(
                E::WeightSum { .. }
                | E::NegativeWeight
                | E::WeightCount { .. }
                | E::NonPositiveEpsilon(_)
                | E::NegativeAlpha(_)
                | E::NegativeRidge(_)
                | E::InvalidKernel(_)
                | E::InvalidComponentCount { .. }
                | E::GapViolated(_)
                | E::InvalidSpec(_),
            ) => 2,
            _ => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
