use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spectrum contains a zero eigenvalue; set exclude_zero_modes or add a mass")]
    ZeroEigenvalue,

    #[error("spectrum is empty after zero-mode exclusion")]
    EmptySpectrum,

    #[error("theta functions require t > 0, got {0}")]
    NonPositiveT(f64),

    #[error("the Dirichlet box is massless; got mass {0}")]
    MassNotSupported(f64),

    #[error("the massive torus requires m > 0")]
    ZeroMass,

    #[error("quadrature missed tolerance {tolerance:e} after {subdivisions} subdivisions (estimate {estimate:e})")]
    QuadratureFailure {
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("Taylor order {order} needs order < d = {d}")]
    OrderTooHigh { order: usize, d: usize },

    #[error("lattice with {count} sites exceeds the limit {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("least-squares design is ill-conditioned (condition {0:e})")]
    IllConditioned(f64),

    #[error("{samples} samples for {basis} basis functions; need at least twice as many")]
    InsufficientSamples { samples: usize, basis: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
