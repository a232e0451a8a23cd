use thiserror::Error;

/// Errors raised by the simulation, inference and learning routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("arity mismatch: expected {expected}, got {got} ({what})")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("degenerate demonstration #{index}: {msg}")]
    DegenerateDemo { index: usize, msg: String },

    #[error("unknown agent: {0}")]
    Lookup(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn arity(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Arity {
            what,
            expected,
            got,
        }
    }
}
