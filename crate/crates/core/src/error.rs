use alloc::string::String;
use core::fmt;

/// Errors raised by the model, the scheduler and the analysis routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    InvalidArgument(String),
    /// A caller broke an operation's precondition (e.g. an infeasible action).
    ContractViolation(String),
    /// A metric is undefined for the given run (e.g. no arrivals).
    UndefinedMetric(&'static str),
    /// A run configuration is inconsistent.
    Config(String),
}

/// Result alias for this crate.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::ContractViolation(msg) => write!(f, "contract violation: {msg}"),
            Error::UndefinedMetric(what) => write!(f, "undefined metric: {what}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}

macro_rules! violation {
    ($($arg:tt)*) => {
        $crate::Error::ContractViolation(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid;
pub(crate) use violation;
