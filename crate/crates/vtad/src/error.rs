use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] vtad_core::Error),

    /// A core validation error raised while reading a specific line.
    #[error("{}:{line}: {source}", path.display())]
    AtLine {
        path: PathBuf,
        line: usize,
        source: vtad_core::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Core(e) | Error::AtLine { source: e, .. } => e.class(),
            Error::Format { .. } => "FormatError",
            Error::Io { .. } => "IoError",
            Error::Config { .. } => "ConfigError",
            Error::Json { .. } => "FormatError",
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn at_line(path: &Path, line: usize, source: vtad_core::Error) -> Self {
        Error::AtLine {
            path: path.to_path_buf(),
            line,
            source,
        }
    }
}
