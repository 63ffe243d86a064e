use std::io;
use std::path::{Path, PathBuf};

use decafbench_core::analysis::AnalysisError;
use decafbench_core::dataset::DatasetError;
use thiserror::Error;

use crate::dcf::DcfError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Image { path: PathBuf, source: image::ImageError },
    #[error("{}:{line}: {source}", path.display())]
    Parse { path: PathBuf, line: usize, source: DatasetError },
    #[error("{}: {source}", path.display())]
    Dcf { path: PathBuf, source: DcfError },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().to_path_buf(), source }
    }

    pub fn json(path: impl AsRef<Path>, source: serde_json::Error) -> Self {
        Error::Json { path: path.as_ref().to_path_buf(), source }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => exit::IO,
            Error::Json { source, .. } if source.is_io() => exit::IO,
            Error::Image { source: image::ImageError::IoError(_), .. } => exit::IO,
            Error::Dcf { source: DcfError::Io(_), .. } => exit::IO,
            Error::Analysis(e) if e.is_degenerate() => exit::DEGENERATE,
            _ => exit::VALIDATION,
        }
    }
}
