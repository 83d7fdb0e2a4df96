use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("predicted length {predicted} exceeds budget {budget}")]
    BudgetExceeded { predicted: String, budget: u64 },
    #[error("substitution matrix is not primitive")]
    NotPrimitive,
    #[error("search exhausted: {0}")]
    NotFound(String),
    #[error("word is not in the substitution language: {0}")]
    NotInLanguage(String),
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("precision cap of {cap} bits reached: {what}")]
    PrecisionExhausted { what: String, cap: u32 },
    #[error("hypothesis violated: {0}")]
    WrongClass(String),
    #[error("repeated eigenvalue")]
    RepeatedEigenvalue,
    #[error("zero eigenvalue")]
    ZeroEigenvalue,
    #[error("function does not have zero mean (mean = {0:e})")]
    NotMeanZero(f64),
    #[error("degenerate function: {0}")]
    DegenerateF(String),
    #[error("radius {0} exceeds 1/2")]
    RadiusTooLarge(f64),
    #[error("tail not converged: {0}")]
    TailNotConverged(String),
    #[error("value is within the error of a half-integer at {bits} bits")]
    HalfIntegerAmbiguity { bits: u32 },
    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn precision(what: impl Into<String>, cap: u32) -> Self {
        Error::PrecisionExhausted { what: what.into(), cap }
    }
}
