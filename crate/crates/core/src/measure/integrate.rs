//! Monte Carlo estimates under `ν∞` with importance weights `e^{-U}`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::sample_gaussian;
use super::weight::WeightFunction;
use crate::error::{Error, Result};
use crate::model::OuModel;

/// Sample mean with its standard error `s/√n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_values(values: &[f64], seed: u64) -> Self {
        let n = values.len();
        let nn = n as f64;
        let mean = values.iter().sum::<f64>() / nn;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nn - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / nn).sqrt(),
            n_samples: n,
            seed,
        }
    }

    /// Estimate of `E[a − b]` from paired values.
    pub fn paired_difference(a: &[f64], b: &[f64], seed: u64) -> Self {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Self::from_values(&d, seed)
    }
}

#[derive(Clone, Debug)]
pub struct WeightedMeasure {
    model: OuModel,
    weight: WeightFunction,
}

impl WeightedMeasure {
    pub fn new(model: OuModel, weight: WeightFunction) -> Result<Self> {
        if model.dim() != weight.dim() {
            return Err(Error::Dimension(format!(
                "model has dimension {} but the weight has dimension {}",
                model.dim(),
                weight.dim()
            )));
        }
        Ok(Self { model, weight })
    }

    pub fn unweighted(model: OuModel) -> Self {
        let dim = model.dim();
        Self {
            model,
            weight: WeightFunction::zero(dim),
        }
    }

    pub fn model(&self) -> &OuModel {
        &self.model
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// `n` draws from `μ∞` with their weights `e^{-U(x)}`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<WeightedSamples> {
        if n == 0 {
            return Err(Error::Domain("sample count must be positive".into()));
        }
        let points = sample_gaussian(&self.model, n, seed);
        let weights: Vec<f64> = points.par_iter().map(|x| self.weight.density(x)).collect();
        Ok(WeightedSamples { points, weights, seed })
    }

    /// Total mass `∫ e^{-U} dμ∞`.
    pub fn mass(&self, n: usize, seed: u64) -> Result<McEstimate> {
        self.sample(n, seed)?.estimate(|_| 1.0)
    }
}

/// A fixed sample set shared between the two sides of an identity.
#[derive(Clone, Debug)]
pub struct WeightedSamples {
    pub points: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl WeightedSamples {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Per-sample values `h(x_s, w_s)`; a non-finite value is an error that
    /// names the sample.
    pub fn map<F>(&self, h: F) -> Result<Vec<f64>>
    where
        F: Fn(&DVector<f64>, f64) -> f64 + Sync,
    {
        let values: Vec<f64> = self
            .points
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(x, &w)| h(x, w))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                index: i,
                point: self.points[i].iter().cloned().collect(),
            });
        }
        Ok(values)
    }

    /// Integrand values `g(x_s) e^{-U(x_s)}`.
    pub fn weighted_values<G>(&self, g: G) -> Result<Vec<f64>>
    where
        G: Fn(&DVector<f64>) -> f64 + Sync,
    {
        self.map(|x, w| if w == 0.0 { 0.0 } else { g(x) * w })
    }

    /// Estimate of `∫ g e^{-U} dμ∞`.
    pub fn estimate<G>(&self, g: G) -> Result<McEstimate>
    where
        G: Fn(&DVector<f64>) -> f64 + Sync,
    {
        Ok(McEstimate::from_values(&self.weighted_values(g)?, self.seed))
    }
}

/// Estimate of `∫ g e^{-U} dμ∞` (unnormalized).
pub fn integrate_nu<G>(w: &WeightedMeasure, g: G, n: usize, seed: u64) -> Result<McEstimate>
where
    G: Fn(&DVector<f64>) -> f64 + Sync,
{
    w.sample(n, seed)?.estimate(g)
}
