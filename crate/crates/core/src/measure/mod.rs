//! Gaussian sampling, convex weights and Monte Carlo integration against the
//! weighted measure `ν∞ = e^{-U} μ∞`.

mod ibp;
mod integrate;
mod sampling;
mod weight;

pub use ibp::{check_ibp, check_ibp_on, ibp_integrands};
pub use integrate::{integrate_nu, McEstimate, WeightedMeasure, WeightedSamples};
pub use sampling::{sample_gaussian, sample_with_factor, BLOCK_SIZE};
pub use weight::{ConvexityCertificate, WeightFunction};
