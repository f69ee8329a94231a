use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad error class, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Format,
    Config,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Io => 3,
            ErrorClass::Format => 4,
            ErrorClass::Config => 5,
            ErrorClass::Internal => 6,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error at byte offset {offset}: {source}")]
    ReadAt { offset: u64, source: io::Error },

    #[error("I/O error on {}: {source}", path.display())]
    Path { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("not a graph file (bad magic)")]
    BadMagic,

    #[error("unsupported file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("file truncated in section `{section}`")]
    Truncated { section: &'static str },

    #[error("malformed section `{section}`: {message}")]
    Malformed { section: &'static str, message: String },

    #[error("checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    Checksum { stored: u32, computed: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cosine similarity undefined for a zero vector")]
    ZeroVector,

    #[error("rank correlation undefined: zero variance")]
    ZeroVariance,

    #[error("insufficient coverage: {covered} covered items, at least {required} required")]
    InsufficientCoverage { covered: usize, required: usize },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub fn at_path(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Path {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ReadAt { .. } | Error::Path { .. } | Error::Io(_) => ErrorClass::Io,
            Error::Parse { .. }
            | Error::BadMagic
            | Error::VersionMismatch { .. }
            | Error::Truncated { .. }
            | Error::Malformed { .. }
            | Error::Checksum { .. } => ErrorClass::Format,
            Error::Config(_) | Error::ZeroVector | Error::ZeroVariance | Error::InsufficientCoverage { .. } => {
                ErrorClass::Config
            }
            Error::Internal(_) => ErrorClass::Internal,
            Error::Stage { source, .. } => source.class(),
        }
    }
}
