use thiserror::Error;

/// Errors raised by the arithmetic, matrix and basis layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime >= 3")]
    NotPrime(u64),
    #[error("{q} does not generate (Z/{p}^2)^x: multiplicative order {order}, expected {expected}")]
    NotPrimitive {
        p: u64,
        q: u64,
        order: u64,
        expected: u64,
    },
    #[error("bad precision: {0}")]
    BadPrecision(String),
    #[error("p-adic context mismatch: {left} vs {right}")]
    ContextMismatch { left: String, right: String },
    #[error("{0} is not a p-adic unit")]
    NotAUnit(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("window size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("matrix is not invertible: diagonal entry {index} has positive valuation")]
    NotInvertible { index: usize },
    #[error("bad index: {0}")]
    BadIndex(String),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Configuration errors map to exit code 2 in the CLI.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::NotPrime(_) | Error::NotPrimitive { .. } | Error::BadPrecision(_)
        )
    }
}
