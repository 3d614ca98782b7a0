#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad parameters or data that violates a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// An enumeration or search exceeded its configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub fn budget<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Budget(msg.into()))
}
