use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("item {item} outside universe [1, {n}]")]
    ItemOutOfRange { item: u64, n: u64 },
    #[error("slice bounds [{t1}, {t2}] invalid for stream of length {m}")]
    BadSlice { t1: usize, t2: usize, m: usize },
    #[error("negative frequency with non-integer exponent {p}")]
    Domain { p: f64 },
    #[error("inconsistent generator profile: {0}")]
    Profile(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no complete block was observed")]
    InsufficientData,
    #[error("prefix holds {have} items, extraction needs {need}")]
    InsufficientPrefix { have: usize, need: usize },
    #[error("need {need} random bits, have {have}")]
    InsufficientBits { have: usize, need: usize },
    #[error("malformed stream file: {0}")]
    Format(String),
    #[error("io: {0}")]
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
