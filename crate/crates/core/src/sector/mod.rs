//! The `L^p` duality map, the pointwise identities behind the sector
//! estimate, the numerical-range criterion, and the field of values of
//! Galerkin sections of the generator.

mod dual;
mod fov;
mod galerkin;
mod identities;
mod range;

pub use dual::{dual_function, dual_gradient, dual_value};
pub use fov::{field_of_values, FovReport, DEFAULT_FOV_ANGLES};
pub use galerkin::{
    assemble as assemble_galerkin, galerkin_matrix, Assembly, GalerkinOptions, GalerkinSystem, Moments,
};
pub use identities::{check_pointwise_identities, pointwise_identities, PointwiseIdentities};
pub use range::{check_numerical_range, numerical_range_on, numerical_range_profile, RangeIntegrand, RangeSample};
