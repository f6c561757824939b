use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("valuation of zero is undefined (infinite)")]
    ZeroValuation,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("CRT moduli not coprime: {a} and {b}")]
    CrtNotCoprime { a: String, b: String },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial is not integer-valued")]
    NotIntegerValued,
    #[error("cannot parse polynomial {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("n >= 2 required; n = 1 handled in constructions")]
    SingleBlock,
    #[error("indispensability hypothesis not satisfied; use brute-force oracle")]
    HypothesisNotSatisfied,
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("construction invariant violated: {0}")]
    Invariant(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
