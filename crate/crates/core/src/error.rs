use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch, expected {expected:?} but got {actual:?}")]
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("{op}: backward called without a cached forward activation")]
    MissingCache { op: &'static str },

    #[error("parameter `{0}` has no gradient")]
    MissingGrad(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{0}: file is empty")]
    EmptyInput(String),

    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("truncated {what}: needed {needed} bytes, {available} available")]
    Truncated {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("checkpoint manifest does not match the model: {0}")]
    ManifestMismatch(String),

    #[error("class `{class}` has {available} members, {needed} required")]
    ClassTooSmall {
        class: String,
        needed: usize,
        available: usize,
    },

    #[error("dataset `{0}` appears in both the training and validation sources")]
    DatasetOverlap(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(op: &'static str, expected: &[usize], actual: &[usize]) -> Self {
        Error::ShapeMismatch {
            op,
            expected: expected.to_vec(),
            actual: actual.to_vec(),
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 1 internal error, 2 input error, 3 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::EmptyInput(_)
            | Error::BadMagic { .. }
            | Error::UnsupportedVersion { .. }
            | Error::Truncated { .. }
            | Error::ManifestMismatch(_)
            | Error::ClassTooSmall { .. }
            | Error::Io { .. } => 2,
            Error::InvalidArgument(_) | Error::DatasetOverlap(_) => 3,
            Error::ShapeMismatch { .. }
            | Error::MissingCache { .. }
            | Error::MissingGrad(_)
            | Error::Serde(_)
            | Error::Csv(_) => 1,
        }
    }
}
