use thiserror::Error;

/// Everything that can go wrong in the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("not an automorphism: {0}")]
    InvalidAutomorphism(String),
    #[error("not a subgroup of the ambient group")]
    NotSubgroup,
    #[error("filter is not normal: {0}")]
    NotNormal(String),
    #[error("name is not hereditarily symmetric: {0}")]
    NotSymmetric(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{what} exceeds guard ({size} > {limit})")]
    GuardExceeded { what: &'static str, size: u128, limit: u128 },
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unresolved reference `{0}`")]
    Unresolved(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
