use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("{op}: expected a {expected} tensor")]
    Dtype {
        op: &'static str,
        expected: &'static str,
    },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite gradient in parameter section `{section}`")]
    NonFinite { section: String },
    #[error("relative error undefined: target sample {sample} has zero norm")]
    DegenerateTarget { sample: usize },
    #[error("linear system is (nearly) singular: smallest pivot ratio {pivot_ratio:e}")]
    Singular { pivot_ratio: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for command-line use: 2 for configuration
    /// problems, 3 for data and file problems, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 2,
            Error::Data(_)
            | Error::Format(_)
            | Error::Io { .. }
            | Error::Json(_)
            | Error::DegenerateTarget { .. }
            | Error::ShapeMismatch { .. } => 3,
            Error::NonFinite { .. }
            | Error::Singular { .. }
            | Error::Dtype { .. }
            | Error::NonScalarLoss(_) => 4,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
