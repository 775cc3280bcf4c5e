use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// `B_k` has a denominator sharing a prime with the requested modulus.
    #[error("denominator of B_{k} is divisible by {prime}, not invertible modulo {modulus}")]
    DenominatorNotInvertible {
        k: u64,
        modulus: String,
        prime: u64,
    },

    /// The exact recurrence was asked for an index beyond its configured cap.
    #[error("exact Bernoulli path capped at k <= {cap}, requested k = {k}")]
    ExactCapExceeded { k: u64, cap: u64 },

    /// The modular power-sum scan cannot represent its working modulus.
    #[error("modular scan for t = {t} exceeds the supported range (t^7 must be below 2^63)")]
    ScanOutOfRange { t: u64 },

    /// Factorization gave up; only reachable for inputs far outside desk scale.
    #[error("could not factor {0}")]
    FactorizationFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(format!($($arg)*))
    };
}
pub(crate) use domain;
