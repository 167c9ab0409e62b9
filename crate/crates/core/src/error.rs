use alloc::string::String;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Operand sizes do not agree (qubit counts, vector lengths, grids).
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A model, ansatz or run configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An input violates a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Time integration produced a non-finite value.
    #[error("numerical abort at step {step}: {reason}")]
    NumericalAbort { step: usize, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! dim_err {
    ($($arg:tt)*) => { $crate::Error::Dimension(alloc::format!($($arg)*)) };
}

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::Error::Config(alloc::format!($($arg)*)) };
}

macro_rules! contract_err {
    ($($arg:tt)*) => { $crate::Error::Contract(alloc::format!($($arg)*)) };
}

pub(crate) use {config_err, contract_err, dim_err};
