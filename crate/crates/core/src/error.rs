use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested grid needs more work units than the configured budget.
    #[error("compute budget exceeded: need {required} work units, budget is {budget}")]
    Budget { required: u128, budget: u128 },

    /// A bracket could not be tightened enough to support a conclusion.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
