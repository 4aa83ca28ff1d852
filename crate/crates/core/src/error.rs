use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("local factor for p = {p} must have constant term 1, got {c0}")]
    ConstantTerm { p: u64, c0: f64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("local factor for p = {p} has degree {deg}, exceeding the spec degree {degree}")]
    DegreeTooLarge { p: u64, deg: usize, degree: usize },

    #[error("no local factor is defined for p = {0}")]
    ProviderUndefined(u64),

    #[error("index {index} outside 1..={max}")]
    OutOfRange { index: u64, max: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("negative radicand 2 - 2*kappa + epsilon = {0}")]
    NegativeRadicand(f64),

    #[error("{0} is not squarefree")]
    NotSquarefree(u64),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("step {step} too coarse, need at most {required}")]
    StepTooCoarse { step: f64, required: f64 },

    #[error("the dyadic block ({0}, {1}] has no nonzero coefficient")]
    ZeroBlock(u64, u64),

    #[error("cache format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
