//! The unweighted transition semigroup `P(t)f(x) = E f(e^{tA}x + Z)`,
//! `Z ~ N(0, Q_t)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::CylinderFunction;
use crate::error::{Error, Result};
use crate::linalg::quadrature::{tensor_hermite, TensorRule};
use crate::linalg::{integrate_sandwich, matrix_exp, spd_sqrt, SpdMatrix};
use crate::measure::{sample_gaussian, sample_with_factor, McEstimate};
use crate::model::OuModel;
use crate::report::CheckReport;

/// How the Gaussian expectation is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum QuadratureSpec {
    /// Gauss–Hermite with 20 nodes per axis up to dimension 4, else
    /// Monte Carlo with `10⁵` samples under `seed`.
    Auto {
        seed: u64,
    },
    GaussHermite {
        nodes: usize,
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::Auto { seed: 0 }
    }
}

pub const DEFAULT_HERMITE_NODES: usize = 20;
pub const MAX_HERMITE_DIM: usize = 4;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

impl QuadratureSpec {
    fn resolve(self, dim: usize) -> QuadratureSpec {
        match self {
            QuadratureSpec::Auto { seed } if dim <= MAX_HERMITE_DIM => {
                let _ = seed;
                QuadratureSpec::GaussHermite {
                    nodes: DEFAULT_HERMITE_NODES,
                }
            }
            QuadratureSpec::Auto { seed } => QuadratureSpec::MonteCarlo {
                samples: DEFAULT_MC_SAMPLES,
                seed,
            },
            other => other,
        }
    }
}

/// Value of `P(t)f(x)` with its error estimate (zero for Gauss–Hermite).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MehlerValue {
    pub value: f64,
    pub std_error: f64,
    pub evaluations: usize,
}

enum Nodes {
    Rule(TensorRule),
    Draws(Vec<DVector<f64>>),
}

/// Precomputed `e^{tA}`, `Q_t` and quadrature nodes for one time `t`.
pub struct MehlerKernel {
    t: f64,
    propagator: DMatrix<f64>,
    q_t: SpdMatrix,
    nodes: Nodes,
}

impl MehlerKernel {
    pub fn new(model: &OuModel, t: f64, quad: QuadratureSpec) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("semigroup time must be positive, got {t}")));
        }
        let propagator = matrix_exp(model.drift().as_matrix(), t)?;
        let q_t = integrate_sandwich(model.drift(), model.diffusion(), t)?;
        let root = spd_sqrt(&q_t);
        let nodes = match quad.resolve(model.dim()) {
            QuadratureSpec::GaussHermite { nodes } => {
                let mut rule = tensor_hermite(model.dim(), nodes);
                for p in rule.points.iter_mut() {
                    *p = root.as_matrix() * &*p;
                }
                Nodes::Rule(rule)
            }
            QuadratureSpec::MonteCarlo { samples, seed } => {
                Nodes::Draws(sample_with_factor(root.as_matrix(), samples, seed))
            }
            QuadratureSpec::Auto { .. } => unreachable!(),
        };
        Ok(Self {
            t,
            propagator,
            q_t,
            nodes,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn propagator(&self) -> &DMatrix<f64> {
        &self.propagator
    }

    pub fn q_t(&self) -> &SpdMatrix {
        &self.q_t
    }

    pub fn apply<F>(&self, f: F, x: &DVector<f64>) -> MehlerValue
    where
        F: Fn(&DVector<f64>) -> f64 + Sync,
    {
        let centre = &self.propagator * x;
        match &self.nodes {
            Nodes::Rule(rule) => {
                let value = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(z, w)| w * f(&(&centre + z)))
                    .sum();
                MehlerValue {
                    value,
                    std_error: 0.0,
                    evaluations: rule.points.len(),
                }
            }
            Nodes::Draws(draws) => {
                let values: Vec<f64> = draws.par_iter().map(|z| f(&(&centre + z))).collect();
                let e = McEstimate::from_values(&values, 0);
                MehlerValue {
                    value: e.mean,
                    std_error: e.std_error,
                    evaluations: values.len(),
                }
            }
        }
    }
}

/// `P(t)f(x)`.
pub fn mehler_apply(
    m: &OuModel,
    f: &CylinderFunction,
    t: f64,
    x: &DVector<f64>,
    quad: QuadratureSpec,
) -> Result<MehlerValue> {
    Ok(MehlerKernel::new(m, t, quad)?.apply(|y| f.value(y), x))
}

/// Range constraint known for a probe function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeBounds {
    NonNegative,
    UnitInterval,
    Unbounded,
}

type ProbeFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// Test function for the semigroup suite; needs no derivatives.
#[derive(Clone)]
pub struct SemigroupProbe {
    pub name: String,
    pub bounds: ProbeBounds,
    /// `∫ f dμ∞` when known in closed form.
    pub exact_mean: Option<f64>,
    f: ProbeFn,
}

impl std::fmt::Debug for SemigroupProbe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemigroupProbe")
            .field("name", &self.name)
            .field("bounds", &self.bounds)
            .field("exact_mean", &self.exact_mean)
            .finish()
    }
}

impl SemigroupProbe {
    pub fn new<F>(name: impl Into<String>, bounds: ProbeBounds, f: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            bounds,
            exact_mean: None,
            f: Arc::new(f),
        }
    }

    pub fn from_function(f: CylinderFunction, bounds: ProbeBounds) -> Self {
        let name = f.name().to_string();
        Self::new(name, bounds, move |x| f.value(x))
    }

    pub fn with_exact_mean(mut self, mean: f64) -> Self {
        self.exact_mean = Some(mean);
        self
    }

    /// `clamp(⟨x, b⟩, 0, 1)`.
    pub fn clamp_linear(b: DVector<f64>) -> Self {
        Self::new("clamp01(linear)", ProbeBounds::UnitInterval, move |x| {
            x.dot(&b).clamp(0.0, 1.0)
        })
    }

    /// `xᵀCx`, whose invariant mean is `Tr(Q∞C)`.
    pub fn quadratic_form(c: DMatrix<f64>, model: &OuModel) -> Self {
        let mean = (model.q_inf().as_matrix() * &c).trace();
        Self::new("quadratic_form", ProbeBounds::Unbounded, move |x| x.dot(&(&c * x))).with_exact_mean(mean)
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupCheckConfig {
    /// Draws from `μ∞` for the invariance and contraction integrals.
    pub samples: usize,
    /// Points at which positivity and sub-Markov bounds are tested.
    pub points: usize,
    pub seed: u64,
    pub sigma: f64,
    pub quadrature: QuadratureSpec,
    /// Exponent of the contraction check.
    pub p: f64,
}

impl Default for SemigroupCheckConfig {
    fn default() -> Self {
        Self {
            samples: 20_000,
            points: 200,
            seed: 0,
            sigma: 3.0,
            quadrature: QuadratureSpec::GaussHermite { nodes: 12 },
            p: 2.0,
        }
    }
}

/// Positivity, sub-Markov bounds, `L^p` contraction and invariance of
/// `μ∞` for every probe and time.
pub fn semigroup_properties_check(
    m: &OuModel,
    times: &[f64],
    probes: &[SemigroupProbe],
    cfg: &SemigroupCheckConfig,
) -> CheckReport {
    let xs = sample_gaussian(m, cfg.samples, cfg.seed);
    // Spread the pointwise test points beyond the bulk of μ∞.
    let pts: Vec<DVector<f64>> = sample_gaussian(m, cfg.points, cfg.seed ^ 0x9e37)
        .into_iter()
        .map(|x| x * 2.0)
        .collect();
    let mut by_time = Vec::new();
    for &t in times {
        let kernel = match MehlerKernel::new(m, t, cfg.quadrature) {
            Ok(k) => k,
            Err(e) => {
                by_time.push(CheckReport::errored(format!("t={t}"), &e));
                continue;
            }
        };
        let mut checks = Vec::new();
        for probe in probes {
            let at = |x: &DVector<f64>| kernel.apply(|y| probe.value(y), x).value;
            if probe.bounds != ProbeBounds::Unbounded {
                let lo = pts.par_iter().map(at).reduce(|| f64::INFINITY, f64::min);
                checks.push(
                    CheckReport::at_least(format!("{}/positivity", probe.name), lo, -1e-12)
                        .metric("points", pts.len() as f64),
                );
                if probe.bounds == ProbeBounds::UnitInterval {
                    let hi = pts.par_iter().map(at).reduce(|| f64::NEG_INFINITY, f64::max);
                    checks.push(CheckReport::at_most(
                        format!("{}/sub_markov", probe.name),
                        hi,
                        1.0 + 1e-12,
                    ));
                }
            }
            let pf: Vec<f64> = xs.par_iter().map(at).collect();
            let f0: Vec<f64> = xs.par_iter().map(|x| probe.value(x)).collect();
            let inv = McEstimate::paired_difference(&pf, &f0, cfg.seed);
            let scale = f0.iter().map(|v| v.abs()).sum::<f64>() / f0.len() as f64;
            checks.push(
                CheckReport::within_sigma(format!("{}/invariance", probe.name), &inv, cfg.sigma, scale)
                    .with_samples(xs.len(), cfg.seed),
            );
            let pw = |v: &f64| v.abs().powf(cfg.p);
            let lp_pf: Vec<f64> = pf.iter().map(pw).collect();
            let lp_f: Vec<f64> = f0.iter().map(pw).collect();
            let gap = McEstimate::paired_difference(&lp_f, &lp_pf, cfg.seed);
            checks.push(
                CheckReport::at_least(
                    format!("{}/lp_contraction", probe.name),
                    gap.mean,
                    -cfg.sigma * gap.std_error,
                )
                .with_std_error(gap.std_error)
                .with_samples(xs.len(), cfg.seed)
                .metric("p", cfg.p),
            );
            if let Some(mean) = probe.exact_mean {
                let est = McEstimate::from_values(&pf, cfg.seed);
                let diff = McEstimate {
                    mean: est.mean - mean,
                    ..est
                };
                checks.push(
                    CheckReport::within_sigma(
                        format!("{}/invariant_mean_oracle", probe.name),
                        &diff,
                        cfg.sigma,
                        mean.abs().max(1.0),
                    )
                    .metric("exact", mean)
                    .metric("estimate", est.mean),
                );
            }
        }
        by_time.push(CheckReport::all(format!("t={t}"), checks));
    }
    CheckReport::all("semigroup", by_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn model() -> OuModel {
        OuModel::from_matrices(dmatrix![-1.0, 0.8; -0.3, -0.6], dmatrix![1.0, 0.2; 0.2, 0.5]).unwrap()
    }

    #[test]
    fn constants_and_linear_functions() {
        let m = model();
        let x = dvector![0.7, -1.2];
        let gh = QuadratureSpec::default();
        let one = mehler_apply(&m, &CylinderFunction::constant(2, 1.0), 0.4, &x, gh).unwrap();
        assert!((one.value - 1.0).abs() < 1e-13);
        let b = dvector![1.0, 2.0];
        let lin = mehler_apply(&m, &CylinderFunction::linear(b.clone()), 0.4, &x, gh).unwrap();
        let want = (matrix_exp(m.drift().as_matrix(), 0.4).unwrap() * &x).dot(&b);
        assert!((lin.value - want).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_path_reports_error() {
        let m = model();
        let x = dvector![0.7, -1.2];
        let f = CylinderFunction::cos_linear(dvector![1.0, -0.5], 0.2);
        let mc = mehler_apply(
            &m,
            &f,
            0.5,
            &x,
            QuadratureSpec::MonteCarlo {
                samples: 100_000,
                seed: 3,
            },
        )
        .unwrap();
        let gh = mehler_apply(&m, &f, 0.5, &x, QuadratureSpec::default()).unwrap();
        assert!(mc.std_error > 0.0);
        assert!((mc.value - gh.value).abs() <= 4.0 * mc.std_error);
    }

    #[test]
    fn long_time_limit_is_the_invariant_mean() {
        let m = model();
        let c = dmatrix![1.0, 0.3; 0.3, 2.0];
        let want = 0.5 * (m.q_inf().as_matrix() * &c).trace();
        for x in [dvector![0.0, 0.0], dvector![3.0, -2.0]] {
            let v = mehler_apply(
                &m,
                &CylinderFunction::quadratic(c.clone()),
                60.0,
                &x,
                QuadratureSpec::default(),
            )
            .unwrap();
            assert!((v.value - want).abs() < 1e-10);
        }
    }

    #[test]
    fn nonpositive_time_is_rejected() {
        let m = model();
        let r = mehler_apply(
            &m,
            &CylinderFunction::constant(2, 1.0),
            0.0,
            &dvector![0.0, 0.0],
            QuadratureSpec::default(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
