use thiserror::Error;

/// Errors raised by the library.
///
/// `Usage` covers violated preconditions (bad sizes, out-of-range indices).
/// `Data` covers malformed input values. `Internal` marks a broken invariant
/// inside the library itself and should never be seen on a correct build.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("enumeration too large: {0}")]
    Scale(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! usage {
    ($($arg:tt)*) => { $crate::error::Error::Usage(format!($($arg)*)) };
}

macro_rules! internal {
    ($($arg:tt)*) => { $crate::error::Error::Internal(format!($($arg)*)) };
}

pub(crate) use internal;
pub(crate) use usage;
