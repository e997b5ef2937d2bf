//! `f* = f̄ |f|^{p−2}`, set to zero where `f` vanishes.

use nalgebra::{Complex, DVector};

use crate::calculus::ComplexFunction;

pub fn dual_value(z: Complex<f64>, p: f64) -> Complex<f64> {
    let r = z.norm();
    if r == 0.0 {
        Complex::new(0.0, 0.0)
    } else {
        z.conj() * r.powf(p - 2.0)
    }
}

pub fn dual_function(f: &ComplexFunction, p: f64, x: &DVector<f64>) -> Complex<f64> {
    dual_value(f.value(x), p)
}

/// Gradient of `f*` from `f` and any linear image of `∇f` (for instance
/// `D_H f`): `|f|^{p−2} Df̄ + (p−2)|f|^{p−4} f̄ Re(f̄ Df)`.
pub fn dual_gradient(z: Complex<f64>, dz: &DVector<Complex<f64>>, p: f64) -> DVector<Complex<f64>> {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        return DVector::zeros(dz.len());
    }
    let a = r2.powf(0.5 * (p - 2.0));
    let b = (p - 2.0) * r2.powf(0.5 * (p - 4.0));
    dz.map(|d| d.conj() * a + z.conj() * (b * (z.conj() * d).re))
}
