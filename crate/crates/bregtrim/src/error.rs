use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] bregtrim_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Malformed input file; `line` is 1-based and counts the header.
    #[error("{}, line {line}, column {column}: {message}", path.display())]
    Input {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    /// A fit or experiment produced no usable answer.
    #[error("{0}")]
    Degenerate(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for usage and domain problems, 3 for IO failures, 4 for degenerate
    /// results.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Degenerate(_) => 4,
            Error::Core(bregtrim_core::Error::DegenerateInput(_)) => 4,
            Error::Core(_) | Error::Input { .. } | Error::Usage(_) => 2,
        }
    }
}
