//! Cylinder test functions, the `H`-gradient, the perturbed generator and
//! the unweighted Mehler semigroup.

mod family;
mod function;
mod generator;
mod mehler;

pub use family::FunctionSampler;
pub use function::{d_h, ComplexFunction, CylinderFunction, Growth};
pub use generator::{apply_adjoint_generator, apply_generator, generator_terms, GeneratorTerms};
pub use mehler::{
    mehler_apply, semigroup_properties_check, MehlerKernel, MehlerValue, ProbeBounds, QuadratureSpec,
    SemigroupCheckConfig, SemigroupProbe,
};
