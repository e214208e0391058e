use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("(gamma={gamma}, lambda={lambda}) lies on or inside the circle lambda^2 + gamma^2 = 1")]
    BmCircleViolation { gamma: f64, lambda: f64 },

    #[error("(gamma={gamma}, lambda={lambda}) is the critical point |lambda| = 1, where epsilon vanishes")]
    CriticalPoint { gamma: f64, lambda: f64 },

    #[error("x parameter is undefined for the isotropic chain (gamma = 0)")]
    ZeroAnisotropy,

    #[error("symbol discontinuity count requires an isotropic model, got gamma={gamma}")]
    NotIsotropic { gamma: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e}: estimated error {abs_error:e} after {intervals} intervals")]
    QuadratureFailure {
        abs_error: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("eigensolver failed: {0}")]
    EigensolveFailure(String),

    #[error("single-particle eigenvalue {value} lies outside [-1, 1]")]
    SpectrumOutOfRange { value: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("design matrix is rank deficient")]
    SingularDesign,

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("-ln(lambda1) vanishes at L={block_len}; ratio undefined")]
    DivisionByZero { block_len: usize },

    #[error("level list truncated too early: tail weight exp(-eps_last) = {tail:e}")]
    Truncation { tail: f64 },

    #[error("chain length {n} exceeds the limit of {max} sites")]
    SizeLimit { n: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
