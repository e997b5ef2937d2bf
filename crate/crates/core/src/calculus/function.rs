//! Smooth test functions with value, gradient and Hessian oracles.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gaussian_vector, HGeometry};

type ValueFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Polynomial,
}

impl Growth {
    fn join(self, other: Growth) -> Growth {
        if self == Growth::Bounded && other == Growth::Bounded {
            Growth::Bounded
        } else {
            Growth::Polynomial
        }
    }
}

/// Points and tolerance used when cross-validating user oracles.
const VALIDATION_POINTS: usize = 20;
const VALIDATION_TOL: f64 = 1e-6;

/// Real cylinder function `f: ℝⁿ → ℝ` with derivative oracles.
#[derive(Clone)]
pub struct CylinderFunction {
    dim: usize,
    name: String,
    growth: Growth,
    value: ValueFn,
    gradient: GradFn,
    hessian: HessFn,
}

impl fmt::Debug for CylinderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylinderFunction")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("growth", &self.growth)
            .finish()
    }
}

impl CylinderFunction {
    /// Wraps user closures after checking both derivative oracles against
    /// centred finite differences at 20 random points.
    pub fn new<V, G, H>(
        dim: usize,
        name: impl Into<String>,
        growth: Growth,
        value: V,
        gradient: G,
        hessian: H,
    ) -> Result<Self>
    where
        V: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        H: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let f = Self::raw(dim, name, growth, value, gradient, hessian);
        f.validate(VALIDATION_POINTS, 0x5eed)?;
        Ok(f)
    }

    pub(crate) fn raw<V, G, H>(
        dim: usize,
        name: impl Into<String>,
        growth: Growth,
        value: V,
        gradient: G,
        hessian: H,
    ) -> Self
    where
        V: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        H: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            name: name.into(),
            growth,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
        }
    }

    /// Compares the gradient and Hessian oracles with centred differences.
    pub fn validate(&self, points: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..points {
            let x = gaussian_vector(self.dim, &mut rng);
            let g = self.gradient(&x);
            let hs = self.hessian(&x);
            if g.len() != self.dim || hs.nrows() != self.dim || hs.ncols() != self.dim {
                return Err(Error::Dimension(format!(
                    "oracles of `{}` return the wrong shape",
                    self.name
                )));
            }
            let fx = self.value(&x);
            let mut g_fd = DVector::zeros(self.dim);
            let mut h_fd = DMatrix::zeros(self.dim, self.dim);
            for i in 0..self.dim {
                let h = 1e-5 * x[i].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                g_fd[i] = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
                let col = (self.gradient(&xp) - self.gradient(&xm)) / (2.0 * h);
                h_fd.set_column(i, &col);
            }
            let g_scale = g.amax().max(fx.abs()).max(1.0);
            let g_err = (&g - &g_fd).amax() / g_scale;
            let h_scale = hs.amax().max(g.amax()).max(1.0);
            let h_err = (&hs - &h_fd).amax() / h_scale;
            let err = g_err.max(h_err);
            if !(err <= VALIDATION_TOL) {
                return Err(Error::DerivativeOracle {
                    name: self.name.clone(),
                    point: x.iter().cloned().collect(),
                    error: err,
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.hessian)(x)
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::raw(
            dim,
            format!("const({c})"),
            Growth::Bounded,
            move |_| c,
            move |_| DVector::zeros(dim),
            move |_| DMatrix::zeros(dim, dim),
        )
    }

    /// `⟨x, b⟩`.
    pub fn linear(b: DVector<f64>) -> Self {
        let dim = b.len();
        let g = b.clone();
        Self::raw(
            dim,
            "linear",
            Growth::Polynomial,
            move |x| x.dot(&b),
            move |_| g.clone(),
            move |_| DMatrix::zeros(dim, dim),
        )
    }

    /// `½ xᵀCx` with `C` symmetrized.
    pub fn quadratic(c: DMatrix<f64>) -> Self {
        let dim = c.nrows();
        let c = (&c + c.transpose()) * 0.5;
        let (c1, c2) = (c.clone(), c.clone());
        Self::raw(
            dim,
            "quadratic",
            Growth::Polynomial,
            move |x| 0.5 * x.dot(&(&c * x)),
            move |x| &c1 * x,
            move |_| c2.clone(),
        )
    }

    /// `cos(⟨x, b⟩ + φ)`.
    pub fn cos_linear(b: DVector<f64>, phase: f64) -> Self {
        let dim = b.len();
        let (b1, b2) = (b.clone(), b.clone());
        Self::raw(
            dim,
            "cos",
            Growth::Bounded,
            move |x| (x.dot(&b) + phase).cos(),
            move |x| &b1 * (-(x.dot(&b1) + phase).sin()),
            move |x| &b2 * b2.transpose() * (-(x.dot(&b2) + phase).cos()),
        )
    }

    /// `sin(⟨x, b⟩ + φ)`.
    pub fn sin_linear(b: DVector<f64>, phase: f64) -> Self {
        Self::cos_linear(b, phase - std::f64::consts::FRAC_PI_2).renamed("sin")
    }

    /// `tanh(⟨x, b⟩)`.
    pub fn tanh_linear(b: DVector<f64>) -> Self {
        let dim = b.len();
        let (b1, b2) = (b.clone(), b.clone());
        Self::raw(
            dim,
            "tanh",
            Growth::Bounded,
            move |x| x.dot(&b).tanh(),
            move |x| {
                let t = x.dot(&b1).tanh();
                &b1 * (1.0 - t * t)
            },
            move |x| {
                let t = x.dot(&b2).tanh();
                &b2 * b2.transpose() * (-2.0 * t * (1.0 - t * t))
            },
        )
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        let (v, g, h) = (self.value.clone(), self.gradient.clone(), self.hessian.clone());
        Self::raw(
            self.dim,
            format!("{c}*{}", self.name),
            self.growth,
            move |x| c * v(x),
            move |x| g(x) * c,
            move |x| h(x) * c,
        )
    }

    pub fn shifted(&self, c: f64) -> Self {
        let (v, g, h) = (self.value.clone(), self.gradient.clone(), self.hessian.clone());
        Self::raw(
            self.dim,
            format!("{}+{c}", self.name),
            self.growth,
            move |x| v(x) + c,
            move |x| g(x),
            move |x| h(x),
        )
    }

    pub fn sum(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in sum");
        let (v1, g1, h1) = (self.value.clone(), self.gradient.clone(), self.hessian.clone());
        let (v2, g2, h2) = (other.value.clone(), other.gradient.clone(), other.hessian.clone());
        Self::raw(
            self.dim,
            format!("({}+{})", self.name, other.name),
            self.growth.join(other.growth),
            move |x| v1(x) + v2(x),
            move |x| g1(x) + g2(x),
            move |x| h1(x) + h2(x),
        )
    }

    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in product");
        let (v1, g1, h1) = (self.value.clone(), self.gradient.clone(), self.hessian.clone());
        let (v2, g2, h2) = (other.value.clone(), other.gradient.clone(), other.hessian.clone());
        let (v1b, g1b, v2b, g2b) = (v1.clone(), g1.clone(), v2.clone(), g2.clone());
        let (v1c, v2c) = (v1.clone(), v2.clone());
        Self::raw(
            self.dim,
            format!("({}*{})", self.name, other.name),
            self.growth.join(other.growth),
            move |x| v1c(x) * v2c(x),
            move |x| g1(x) * v2(x) + g2(x) * v1(x),
            move |x| {
                let (a, b) = (v1b(x), v2b(x));
                let (ga, gb) = (g1b(x), g2b(x));
                h1(x) * b + h2(x) * a + &ga * gb.transpose() + &gb * ga.transpose()
            },
        )
    }
}

/// `D_H f(x) = Q∇f(x)`, the `ℝⁿ` representative of the `H`-gradient.
pub fn d_h(g: &HGeometry, f: &CylinderFunction, x: &DVector<f64>) -> DVector<f64> {
    g.model().diffusion().as_matrix() * f.gradient(x)
}

/// Complex test function `u + iv`.
#[derive(Clone, Debug)]
pub struct ComplexFunction {
    pub re: CylinderFunction,
    pub im: CylinderFunction,
}

impl ComplexFunction {
    pub fn new(re: CylinderFunction, im: CylinderFunction) -> Self {
        assert_eq!(re.dim(), im.dim(), "real and imaginary parts differ in dimension");
        Self { re, im }
    }

    pub fn real(re: CylinderFunction) -> Self {
        let dim = re.dim();
        Self::new(re, CylinderFunction::constant(dim, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn value(&self, x: &DVector<f64>) -> Complex<f64> {
        Complex::new(self.re.value(x), self.im.value(x))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<Complex<f64>> {
        let gr = self.re.gradient(x);
        let gi = self.im.gradient(x);
        gr.zip_map(&gi, Complex::new)
    }
}
