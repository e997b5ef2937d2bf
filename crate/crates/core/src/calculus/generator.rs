//! The perturbed generator and its `ν∞`-adjoint, evaluated pointwise.

use nalgebra::DVector;
use serde::Serialize;

use super::function::CylinderFunction;
use crate::measure::WeightFunction;
use crate::model::HGeometry;

/// The three summands of `Lf(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneratorTerms {
    /// `½ Tr(Q ∇²f)`.
    pub trace: f64,
    /// `⟨Ax, ∇f⟩` (or the adjoint drift).
    pub drift: f64,
    /// `[B D_H f, D_H U]_H` (or with `B^♯`).
    pub weight: f64,
}

impl GeneratorTerms {
    pub fn total(&self) -> f64 {
        self.trace + self.drift + self.weight
    }
}

fn half_trace(g: &HGeometry, f: &CylinderFunction, x: &DVector<f64>) -> f64 {
    let q = g.model().diffusion().as_matrix();
    0.5 * q.component_mul(&f.hessian(x)).sum()
}

/// Summands of `Lf(x) = ½Tr(Q∇²f) + ⟨Ax, ∇f⟩ + [BQ∇f, Q∇U]_H`.
pub fn generator_terms(g: &HGeometry, u: &WeightFunction, f: &CylinderFunction, x: &DVector<f64>) -> GeneratorTerms {
    let grad = f.gradient(x);
    let drift = (g.model().drift().as_matrix() * x).dot(&grad);
    // [BQ∇f, Q∇U]_H = (BQ∇f)ᵀ ∇U
    let weight = if u.is_zero() {
        0.0
    } else {
        let q = g.model().diffusion().as_matrix();
        (g.b() * (q * &grad)).dot(&u.gradient(x))
    };
    GeneratorTerms {
        trace: half_trace(g, f, x),
        drift,
        weight,
    }
}

pub fn apply_generator(g: &HGeometry, u: &WeightFunction, f: &CylinderFunction, x: &DVector<f64>) -> f64 {
    generator_terms(g, u, f, x).total()
}

/// `L̃f(x) = ½Tr(Q∇²f) + ⟨Q∞AᵀQ∞⁻¹x, ∇f⟩ + [B^♯Q∇f, Q∇U]_H`, the operator of
/// the form with `B^♯` in place of `B`.
pub fn adjoint_generator_terms(
    g: &HGeometry,
    u: &WeightFunction,
    f: &CylinderFunction,
    x: &DVector<f64>,
) -> GeneratorTerms {
    let grad = f.gradient(x);
    let qi = g.model().q_inf().as_matrix();
    let a = g.model().drift().as_matrix();
    let drift = (qi * a.transpose() * (g.gram_inf_inv() * x)).dot(&grad);
    let weight = if u.is_zero() {
        0.0
    } else {
        let q = g.model().diffusion().as_matrix();
        (g.b_adj() * (q * &grad)).dot(&u.gradient(x))
    };
    GeneratorTerms {
        trace: half_trace(g, f, x),
        drift,
        weight,
    }
}

pub fn apply_adjoint_generator(g: &HGeometry, u: &WeightFunction, f: &CylinderFunction, x: &DVector<f64>) -> f64 {
    adjoint_generator_terms(g, u, f, x).total()
}
