use std::path::PathBuf;

use noiseharvest_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

impl From<CoreError> for HarvestError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(_) | CoreError::RateTooSmall { .. } => HarvestError::Config(e.to_string()),
            other => HarvestError::Numerical(other),
        }
    }
}

impl HarvestError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarvestError::Config(_) => 2,
            HarvestError::Numerical(_) => 3,
            HarvestError::Io { .. } | HarvestError::Csv { .. } => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarvestError + '_ {
        move |source| HarvestError::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, HarvestError>;
