use std::io;
use std::path::PathBuf;

/// Errors raised anywhere in the forensic pipeline.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A malformed or unsupported JPEG stream.
    #[error("JPEG parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    /// A model or feature file that does not match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),

    #[error("invalid state: {0}")]
    State(String),

    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
