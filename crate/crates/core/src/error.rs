use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("target {target} unreachable by monotone extension")]
    Unreachable { target: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {update:e})")]
    NoConvergence { iterations: usize, update: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("spectral parameter {0}")]
    SpectralParameter(String),
    #[error("consistency check failed: {0}")]
    Mismatch(String),
    #[error("time step {dt:e} exceeds stability limit {dt_max:e}")]
    TimeStep { dt: f64, dt_max: f64 },
    #[error("instability: norm grew by factor {0:.3}")]
    Unstable(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
