//! Weighted Gaussian integration by parts along `H`-directions.
//!
//! For `h ∈ H`,
//! `∫ [D_H f, h]_H dν = ∫ f ⟨x, Q∞⁻¹ V^♯ h⟩ dν + ∫ f [D_H U, h]_H dν`.

use nalgebra::DVector;

use super::integrate::{McEstimate, WeightedMeasure, WeightedSamples};
use crate::calculus::CylinderFunction;
use crate::error::Result;
use crate::model::HGeometry;
use crate::report::CheckReport;
use crate::tolerance::Tolerances;

/// Per-sample values of the left side and of the two right-hand terms.
pub fn ibp_integrands(
    g: &HGeometry,
    w: &WeightedMeasure,
    samples: &WeightedSamples,
    f: &CylinderFunction,
    h: &DVector<f64>,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    // [D_H f, h]_H = ∇f·h and [D_H U, h]_H = ∇U·h in this representation.
    let direction = g.gram_inf_inv() * (g.v_adj() * h);
    let u = w.weight();
    let lhs = samples.weighted_values(|x| f.gradient(x).dot(h))?;
    let shift = samples.weighted_values(|x| f.value(x) * x.dot(&direction))?;
    let weight = samples.weighted_values(|x| {
        if u.is_zero() {
            0.0
        } else {
            f.value(x) * u.gradient(x).dot(h)
        }
    })?;
    Ok((lhs, shift, weight))
}

/// The identity on an existing sample set; passes iff the paired difference
/// is within `sigma` standard errors of zero.
pub fn check_ibp_on(
    g: &HGeometry,
    w: &WeightedMeasure,
    samples: &WeightedSamples,
    f: &CylinderFunction,
    h: &DVector<f64>,
    tol: &Tolerances,
) -> CheckReport {
    let name = format!("ibp[{}]", f.name());
    let (lhs, shift, weight) = match ibp_integrands(g, w, samples, f, h) {
        Ok(v) => v,
        Err(e) => return CheckReport::errored(name, &e),
    };
    let rhs: Vec<f64> = shift.iter().zip(&weight).map(|(a, b)| a + b).collect();
    let diff = McEstimate::paired_difference(&lhs, &rhs, samples.seed);
    let l = McEstimate::from_values(&lhs, samples.seed);
    let r = McEstimate::from_values(&rhs, samples.seed);
    let scale = l.mean.abs().max(r.mean.abs()).max(1.0);
    CheckReport::within_sigma(name, &diff, tol.sigma, scale)
        .metric("lhs", l.mean)
        .metric("lhs_se", l.std_error)
        .metric("rhs", r.mean)
        .metric("rhs_se", r.std_error)
        .metric("rhs_weight_term", McEstimate::from_values(&weight, samples.seed).mean)
}

pub fn check_ibp(
    w: &WeightedMeasure,
    g: &HGeometry,
    f: &CylinderFunction,
    h: &DVector<f64>,
    n: usize,
    seed: u64,
) -> CheckReport {
    match w.sample(n, seed) {
        Ok(s) => check_ibp_on(g, w, &s, f, h, &Tolerances::default()),
        Err(e) => CheckReport::errored(format!("ibp[{}]", f.name()), &e),
    }
}
