use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown {kind} symbol `{symbol}`")]
    UnknownSymbol { kind: &'static str, symbol: String },

    #[error("`{symbol}` expects {expected} argument(s), found {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("type mismatch: `{symbol}` returns `{found}` but position expects `{expected}`")]
    TypeMismatch {
        symbol: String,
        expected: String,
        found: String,
    },

    #[error("no mode declaration matches `{0}`")]
    MissingMode(String),

    #[error("invalid declaration: {0}")]
    Declaration(String),

    #[error("{0}")]
    Config(String),

    #[error("linear system is numerically unsolvable (condition estimate {condition:e})")]
    Numerical { condition: f64 },

    #[error("atom `{0}` has no ground-truth label")]
    MissingTruth(String),

    #[error("{}:{line}: {source}", path.display())]
    AtLine {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("batch {index}: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classes used by the command-line driver to pick an exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Parse,
    Numerical,
}

impl Error {
    pub fn at_line(self, path: impl Into<PathBuf>, line: usize) -> Self {
        Error::AtLine {
            path: path.into(),
            line,
            source: Box::new(self),
        }
    }

    pub fn in_batch(self, index: usize) -> Self {
        Error::Batch {
            index,
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Syntax { .. }
            | Error::UnknownSymbol { .. }
            | Error::Arity { .. }
            | Error::TypeMismatch { .. }
            | Error::MissingMode(_)
            | Error::Declaration(_)
            | Error::MissingTruth(_) => ErrorClass::Parse,
            Error::Numerical { .. } => ErrorClass::Numerical,
            Error::Config(_) | Error::Io { .. } => ErrorClass::Config,
            Error::AtLine { source, .. } | Error::Batch { source, .. } => source.class(),
        }
    }
}
