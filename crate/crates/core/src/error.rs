//! Error type shared by every numerical module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not stable: eigenvalue {re:.6e}{im:+.6e}i has real part >= -1e-12")]
    Unstable { re: f64, im: f64 },

    #[error("definiteness error: {0}")]
    Definiteness(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("conditioning error: {0}")]
    Conditioning(String),

    #[error(
        "derivative oracle for `{name}` disagrees with finite differences at {point:?} (relative error {error:.3e})"
    )]
    DerivativeOracle { name: String, point: Vec<f64>, error: f64 },

    #[error("convexity error: {0}")]
    NotConvex(String),

    #[error("non-finite integrand at sample {index}, point {point:?}")]
    Evaluation { index: usize, point: Vec<f64> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
