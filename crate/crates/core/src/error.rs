use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("occupation |{z}{c}{t}> lies outside the two-photon space")]
    OutOfSpace { z: usize, c: usize, t: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "step size {step:.3e} too large for generator rate {rate:.3e} (rate * step must be <= 1)"
    )]
    Stiffness { step: f64, rate: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
