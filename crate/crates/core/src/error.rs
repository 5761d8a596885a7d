use thiserror::Error;

/// Failure modes shared by every module.
///
/// `Input` and `Precondition` are caller mistakes, `Budget` means a search
/// ran out of room, `Assertion` means a checked property did not hold.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Precondition(_) => "precondition",
            Error::Budget(_) => "budget",
            Error::Overflow(_) => "overflow",
            Error::Assertion(_) => "assertion",
        }
    }

    /// The message without the category prefix.
    pub fn detail(&self) -> &str {
        match self {
            Error::Input(s)
            | Error::Precondition(s)
            | Error::Budget(s)
            | Error::Overflow(s)
            | Error::Assertion(s) => s,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
