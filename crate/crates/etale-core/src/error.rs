//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants separate violations
//! of mathematical preconditions from malformed input data, so callers can
//! map them to distinct exit codes.

use alloc::string::String;

/// Errors produced by the computational kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two objects that must live over the same modulus do not.
    ModulusMismatch {
        /// Modulus of the left operand.
        left: u64,
        /// Modulus of the right operand.
        right: u64,
    },
    /// Matrix or vector dimensions are incompatible with the operation.
    DimensionMismatch(String),
    /// A mathematical precondition fails (not a malformed input, a wrong one).
    Precondition(String),
    /// An enumeration exceeded its configured bound.
    BoundExceeded {
        /// What was being enumerated.
        what: String,
        /// The configured bound that was hit.
        bound: usize,
    },
    /// Input data is structurally invalid (bad table, bad exponent, bad point).
    InvalidInput(String),
    /// The requested operation is not supported for this input shape.
    Unsupported(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::ModulusMismatch { left, right } => {
                write!(f, "modulus mismatch: {left} vs {right}")
            }
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::BoundExceeded { what, bound } => {
                write!(f, "bound exceeded while enumerating {what} (bound {bound})")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

/// Convenience alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
