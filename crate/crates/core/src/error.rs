use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("coefficient levels differ: {0} vs {1}")]
    LevelMismatch(u64, u64),
    #[error("exponent lattices differ: 1/{0} vs 1/{1}")]
    LatticeMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("series has no invertible leading term")]
    NotInvertible,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
