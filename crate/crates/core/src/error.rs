use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(&'static str),
    #[error("invalid time change: {0}")]
    InvalidTimeChange(&'static str),
    #[error("time {t} outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("inner path reaches {required} but the outer horizon is {horizon}; extend the outer path")]
    CompositionDomain { required: f64, horizon: f64 },
    #[error("path horizon {horizon} is shorter than the required {required}")]
    InsufficientHorizon { required: f64, horizon: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("sample is empty")]
    EmptySample,
}

impl Error {
    /// Errors caused by evaluating outside a valid domain, as opposed to
    /// malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OutOfDomain { .. }
                | Error::CompositionDomain { .. }
                | Error::InsufficientHorizon { .. }
        )
    }
}

pub(crate) fn param(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
