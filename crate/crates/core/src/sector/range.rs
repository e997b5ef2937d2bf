//! Monte Carlo realization of the numerical-range criterion
//! `|Im ∫[BD_Hf, D_Hf*]_H dν| ≤ −cot θ_p · Re ∫[BD_Hf, D_Hf*]_H dν`.
//!
//! For `f = α + iβ` the integrand is
//! `|f|^{p−2}(s₀ + i s₁) + (p−2)|f|^{p−4}(s₂ + i s₃)`, where the `sᵢ` are
//! brackets that do not depend on `p`. They are computed once per sample
//! so one pass serves every exponent.

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::ComplexFunction;
use crate::error::Result;
use crate::measure::{McEstimate, WeightedMeasure, WeightedSamples};
use crate::model::HGeometry;
use crate::tolerance::Tolerances;

/// Below this modulus, samples are left out of integrands with `p < 4`.
pub const ZERO_EXCLUSION: f64 = 1e-12;

/// `p`-independent ingredients of the integrand at each sample.
pub struct RangeIntegrand {
    rows: Vec<[f64; 6]>,
    seed: u64,
}

impl RangeIntegrand {
    pub fn new(g: &HGeometry, samples: &WeightedSamples, f: &ComplexFunction) -> Result<Self> {
        let q = g.model().diffusion().as_matrix();
        let bq = g.b() * q;
        let rows: Vec<[f64; 6]> = samples
            .points
            .par_iter()
            .zip(samples.weights.par_iter())
            .map(|(x, &w)| {
                let (al, be) = (f.re.value(x), f.im.value(x));
                let (gu, gv) = (f.re.gradient(x), f.im.gradient(x));
                // [BQa, Qb]_H = (BQa)·b
                let (bu, bv) = (&bq * &gu, &bq * &gv);
                let (p1, p2, p3, p4) = (bu.dot(&gu), bu.dot(&gv), bv.dot(&gu), bv.dot(&gv));
                let re_f = &gu * al + &gv * be;
                let (p5, p6) = (bu.dot(&re_f), bv.dot(&re_f));
                [
                    al * al + be * be,
                    p1 + p4,
                    p3 - p2,
                    al * p5 + be * p6,
                    al * p6 - be * p5,
                    w,
                ]
            })
            .collect();
        if let Some(i) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(crate::Error::Evaluation {
                index: i,
                point: samples.points[i].iter().cloned().collect(),
            });
        }
        Ok(Self {
            rows,
            seed: samples.seed,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Weighted integrand values at `p` and the number of excluded samples.
    pub fn values(&self, p: f64) -> (Vec<Complex<f64>>, usize) {
        let mut excluded = 0;
        let vals = self
            .rows
            .iter()
            .map(|&[r2, s0, s1, s2, s3, w]| {
                if w == 0.0 {
                    return Complex::new(0.0, 0.0);
                }
                if r2 == 0.0 || (p < 4.0 && r2.sqrt() < ZERO_EXCLUSION) {
                    excluded += 1;
                    return Complex::new(0.0, 0.0);
                }
                let a = r2.powf(0.5 * (p - 2.0));
                let b = (p - 2.0) * r2.powf(0.5 * (p - 4.0));
                Complex::new(a * s0 + b * s2, a * s1 + b * s3) * w
            })
            .collect();
        (vals, excluded)
    }

    pub fn sample(&self, p: f64, c_theta: f64, sigma: f64) -> RangeSample {
        let (vals, excluded) = self.values(p);
        let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        let im: Vec<f64> = vals.iter().map(|z| z.im).collect();
        let er = McEstimate::from_values(&re, self.seed);
        let ei = McEstimate::from_values(&im, self.seed);
        let sg = if ei.mean >= 0.0 { 1.0 } else { -1.0 };
        let m: Vec<f64> = vals.iter().map(|z| -c_theta * z.re - sg * z.im).collect();
        let em = McEstimate::from_values(&m, self.seed);
        let scale = vals.iter().map(|z| z.norm()).sum::<f64>() / vals.len() as f64;
        let margin = -c_theta * er.mean - ei.mean.abs();
        let threshold = -sigma * em.std_error - 1e-12 * scale;
        RangeSample {
            p,
            c_theta,
            re: er.mean,
            im: ei.mean,
            re_std_error: er.std_error,
            im_std_error: ei.std_error,
            margin,
            std_error: em.std_error,
            threshold,
            passed: margin >= threshold,
            n_samples: vals.len(),
            excluded,
            seed: self.seed,
        }
    }
}

/// Estimate of `∫[BD_Hf, D_Hf*]_H dν` and its sector margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeSample {
    pub p: f64,
    pub c_theta: f64,
    pub re: f64,
    pub im: f64,
    pub re_std_error: f64,
    pub im_std_error: f64,
    /// `−C_θ·re − |im|`.
    pub margin: f64,
    pub std_error: f64,
    /// Pass iff `margin ≥ threshold = −σ·std_error` (less a round-off floor).
    pub threshold: f64,
    pub passed: bool,
    pub n_samples: usize,
    pub excluded: usize,
    pub seed: u64,
}

impl RangeSample {
    pub fn value(&self) -> Complex<f64> {
        Complex::new(self.re, self.im)
    }
}

pub fn numerical_range_on(
    g: &HGeometry,
    samples: &WeightedSamples,
    f: &ComplexFunction,
    p: f64,
    tol: &Tolerances,
) -> Result<RangeSample> {
    let c = g.sector_params(p)?.c_theta;
    Ok(RangeIntegrand::new(g, samples, f)?.sample(p, c, tol.sigma))
}

/// One pass over the samples, one result per exponent.
pub fn numerical_range_profile(
    g: &HGeometry,
    samples: &WeightedSamples,
    f: &ComplexFunction,
    ps: &[f64],
    tol: &Tolerances,
) -> Result<Vec<RangeSample>> {
    let integrand = RangeIntegrand::new(g, samples, f)?;
    ps.iter()
        .map(|&p| Ok(integrand.sample(p, g.sector_params(p)?.c_theta, tol.sigma)))
        .collect()
}

pub fn check_numerical_range(
    g: &HGeometry,
    w: &WeightedMeasure,
    f: &ComplexFunction,
    p: f64,
    n: usize,
    seed: u64,
) -> Result<RangeSample> {
    numerical_range_on(g, &w.sample(n, seed)?, f, p, &Tolerances::default())
}
