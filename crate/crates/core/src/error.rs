use thiserror::Error;

/// Errors raised by the ESSOP datapath, engine and training harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// LFSR seeds must be nonzero; the all-zero state is absorbing.
    #[error("invalid LFSR seed {0:#06x}: seed must be nonzero")]
    InvalidSeed(u16),

    /// An operand magnitude exceeded the encoding range `2^exponent`.
    #[error("operand {value} exceeds encoding range 2^{exponent}")]
    OutOfRange { value: f64, exponent: i32 },

    /// Shapes, lengths or configuration did not satisfy an operation contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Dataset could not be read or parsed.
    #[error("dataset error: {0}")]
    Dataset(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
