//! Convex weights `U` for the perturbed measure `e^{-U} μ∞`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_psd, symmetrize};
use crate::model::gaussian_vector;

type ValueFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

const MIDPOINT_SLACK: f64 = 1e-10;
const CONVEXITY_PAIRS: usize = 100;
const GRADIENT_POINTS: usize = 20;
const GRADIENT_TOL: f64 = 1e-6;

/// How convexity of the weight is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexityCertificate {
    /// `U = 0`.
    Zero,
    /// `U(x) = xᵀMx` with `M` positive semidefinite.
    QuadraticForm { m: Vec<Vec<f64>> },
    /// `U(x) = log cosh⟨x, b⟩`, convex as a composition with a linear map.
    LogCosh { b: Vec<f64> },
    /// Spot-checked on random midpoints only.
    UserAsserted,
}

#[derive(Clone)]
enum Kind {
    Zero,
    Quadratic(DMatrix<f64>),
    LogCosh(DVector<f64>),
    Custom { value: ValueFn, gradient: GradFn },
}

#[derive(Clone)]
pub struct WeightFunction {
    dim: usize,
    name: String,
    kind: Kind,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .finish()
    }
}

/// `log cosh(s)` without overflow.
fn log_cosh(s: f64) -> f64 {
    let a = s.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl WeightFunction {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            name: "zero".into(),
            kind: Kind::Zero,
        }
    }

    /// `U(x) = xᵀMx`; `M` must be symmetric positive semidefinite.
    pub fn quadratic(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "weight matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax().max(1.0);
        if (&m - m.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Definiteness("weight matrix is not symmetric".into()));
        }
        let m = symmetrize(&m);
        if !is_psd(&m, 1e-12 * scale) {
            return Err(Error::NotConvex(
                "quadratic weight matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(Self {
            dim: m.nrows(),
            name: "quadratic".into(),
            kind: Kind::Quadratic(m),
        })
    }

    /// `U(x) = log cosh⟨x, b⟩`.
    pub fn log_cosh(b: DVector<f64>) -> Self {
        Self {
            dim: b.len(),
            name: "logcosh".into(),
            kind: Kind::LogCosh(b),
        }
    }

    /// User weight; the gradient and midpoint convexity are spot-checked.
    pub fn custom<V, G>(dim: usize, name: impl Into<String>, value: V, gradient: G) -> Result<Self>
    where
        V: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        let w = Self {
            dim,
            name: name.into(),
            kind: Kind::Custom {
                value: Arc::new(value),
                gradient: Arc::new(gradient),
            },
        };
        w.spot_check(0x0c0ffee)?;
        Ok(w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    /// `M` when the weight is `xᵀMx` (zero counts as `M = 0`).
    pub fn quadratic_matrix(&self) -> Option<DMatrix<f64>> {
        match &self.kind {
            Kind::Zero => Some(DMatrix::zeros(self.dim, self.dim)),
            Kind::Quadratic(m) => Some(m.clone()),
            _ => None,
        }
    }

    pub fn certificate(&self) -> ConvexityCertificate {
        match &self.kind {
            Kind::Zero => ConvexityCertificate::Zero,
            Kind::Quadratic(m) => ConvexityCertificate::QuadraticForm {
                m: m.row_iter().map(|r| r.iter().cloned().collect()).collect(),
            },
            Kind::LogCosh(b) => ConvexityCertificate::LogCosh {
                b: b.iter().cloned().collect(),
            },
            Kind::Custom { .. } => ConvexityCertificate::UserAsserted,
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Quadratic(m) => x.dot(&(m * x)),
            Kind::LogCosh(b) => log_cosh(x.dot(b)),
            Kind::Custom { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            Kind::Zero => DVector::zeros(self.dim),
            Kind::Quadratic(m) => m * x * 2.0,
            Kind::LogCosh(b) => b * x.dot(b).tanh(),
            Kind::Custom { gradient, .. } => gradient(x),
        }
    }

    /// `e^{-U(x)}`.
    pub fn density(&self, x: &DVector<f64>) -> f64 {
        match self.kind {
            Kind::Zero => 1.0,
            _ => (-self.value(x)).exp(),
        }
    }

    /// Midpoint convexity on 100 random pairs and a finite-difference
    /// gradient check at 20 points.
    pub fn spot_check(&self, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..CONVEXITY_PAIRS {
            let x = gaussian_vector(self.dim, &mut rng) * 2.0;
            let y = gaussian_vector(self.dim, &mut rng) * 2.0;
            let mid = self.value(&((&x + &y) * 0.5));
            let chord = 0.5 * (self.value(&x) + self.value(&y));
            if !(mid <= chord + MIDPOINT_SLACK) {
                return Err(Error::NotConvex(format!(
                    "`{}` fails the midpoint inequality by {:.3e}",
                    self.name,
                    mid - chord
                )));
            }
        }
        for _ in 0..GRADIENT_POINTS {
            let x = gaussian_vector(self.dim, &mut rng);
            let g = self.gradient(&x);
            if g.len() != self.dim {
                return Err(Error::Dimension(format!(
                    "gradient of `{}` has length {}",
                    self.name,
                    g.len()
                )));
            }
            let mut err: f64 = 0.0;
            for i in 0..self.dim {
                let h = 1e-5 * x[i].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
                err = err.max((fd - g[i]).abs());
            }
            let err = err / g.amax().max(self.value(&x).abs()).max(1.0);
            if !(err <= GRADIENT_TOL) {
                return Err(Error::DerivativeOracle {
                    name: self.name.clone(),
                    point: x.iter().cloned().collect(),
                    error: err,
                });
            }
        }
        Ok(())
    }
}
