use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),

    /// The operation's mathematical precondition does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    /// A construction could not be completed; `diagnostics` carries the numbers that failed.
    #[error("construction error: {message}")]
    Construction {
        message: String,
        diagnostics: Vec<f64>,
    },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
