use thiserror::Error;

use crate::label::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("missing loss value for element {0}")]
    MissingLoss(Label),

    #[error("enumeration exceeds cap of {cap} ({what})")]
    TooLarge { what: String, cap: usize },

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("unsupported loss range: {0}")]
    UnsupportedLossRange(String),

    #[error("no awake action available")]
    NoAwakeAction,

    #[error("construction defect: {0}")]
    ConstructionDefect(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
