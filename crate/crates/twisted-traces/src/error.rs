use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("precision target not reached (error bound {bound:e})")]
    Precision { bound: f64 },
    #[error("oracle search exhausted: {0}")]
    SearchExhausted(String),
    #[error("linear system infeasible: {0}")]
    Infeasible(String),
    #[error("inconsistent coefficients: {0}")]
    Inconsistent(String),
    #[error("not computed: {0}")]
    NotComputed(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
