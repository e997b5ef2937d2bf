//! Numerical realization of weighted nonsymmetric Ornstein–Uhlenbeck
//! operators in finite dimension and in spectral truncations.
//!
//! The crate builds the model `(A, Q, Q∞)`, the Cameron–Martin geometry with
//! drift operator `B = Q∞AᵀQ⁻¹`, the explicit analyticity sector `θ_p`, and a
//! battery of checks: drift-operator algebra, Dirichlet-form identities,
//! weighted integration by parts, numerical-range containment and the
//! field of values of Galerkin matrices.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod measure;
pub mod model;
pub mod report;
pub mod runner;
pub mod sector;
pub mod suites;
pub mod tolerance;
pub mod wiener;

pub use error::{Error, Result};
pub use report::CheckReport;
pub use tolerance::Tolerances;
