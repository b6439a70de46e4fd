use thiserror::Error;

/// Errors produced by the fitting and recovery routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient coefficients: {len} values allow at most {max_degree} AAA steps and the residual {residual:.3e} is still above tolerance")]
    InsufficientCoefficients {
        len: usize,
        max_degree: usize,
        residual: f64,
    },

    #[error("AAA did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("all barycentric weights are below the pruning threshold")]
    AllWeightsPruned,

    #[error("found only {found} finite poles, expected {expected}")]
    MissingPoles { found: usize, expected: usize },

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("periodic index {0} is not among the supplied Fourier indices")]
    MissingPeriodicIndex(i64),

    #[error("pole {0} is too close to an integer for the non-periodic back-map")]
    NearPeriodicPole(String),

    #[error("real-arithmetic recovery failed: {0}")]
    RealRecovery(String),

    #[error("quadrature did not reach tolerance {tol:.1e} (estimated error {estimate:.3e})")]
    QuadratureNotConverged { tol: f64, estimate: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
