//! Random smooth test functions scaled to the invariant measure.
//!
//! Linear functionals are drawn as `b = W ξ / |ξ|` with `W = Q∞^{-1/2}`, so
//! `⟨x, b⟩` has unit variance under `μ∞` whatever the model's scale.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::function::{ComplexFunction, CylinderFunction};
use crate::linalg::spd_inv_sqrt;
use crate::model::{gaussian_matrix, gaussian_vector, OuModel};

#[derive(Clone, Debug)]
pub struct FunctionSampler {
    whitening: DMatrix<f64>,
    covariance: DMatrix<f64>,
}

impl FunctionSampler {
    pub fn new(model: &OuModel) -> Self {
        Self {
            whitening: spd_inv_sqrt(model.q_inf()),
            covariance: model.q_inf().as_matrix().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.whitening.nrows()
    }

    /// Unit-variance direction under `μ∞`, scaled by `scale`.
    pub fn direction<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> DVector<f64> {
        let xi = gaussian_vector(self.dim(), rng);
        let xi = &xi / xi.norm().max(1e-300);
        &self.whitening * xi * scale
    }

    /// `C = W S W` with `S` symmetric of unit Frobenius scale.
    pub fn quadratic_matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        let n = self.dim();
        let k = gaussian_matrix(n, n, rng);
        let s = (&k + k.transpose()) / (2.0 * (n as f64).sqrt());
        &self.whitening * s * &self.whitening
    }

    /// Deterministic family: linear, centred quadratic, cos, sin and a product.
    pub fn builtin_family<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<CylinderFunction> {
        let n = self.dim();
        let b1 = self.direction(1.0, rng);
        let b2 = self.direction(1.0, rng);
        let c = self.quadratic_matrix(rng);
        let tr = (&c * &self.covariance).trace();
        vec![
            CylinderFunction::linear(b1.clone()),
            CylinderFunction::quadratic(c)
                .shifted(-0.5 * tr)
                .renamed("centred-quadratic"),
            CylinderFunction::cos_linear(b1.clone(), 0.3),
            CylinderFunction::sin_linear(b2.clone(), 0.0),
            CylinderFunction::cos_linear(b1, 0.0)
                .product(&CylinderFunction::linear(b2))
                .renamed("cos*linear"),
            CylinderFunction::constant(n, 1.0),
        ]
    }

    /// One random real function from a mix of polynomial and bounded kinds.
    pub fn random_real<R: Rng + ?Sized>(&self, rng: &mut R) -> CylinderFunction {
        let n = self.dim();
        let kind = rng.random_range(0..6);
        let shift: f64 = rng.random_range(-1.0..1.0);
        match kind {
            0 => CylinderFunction::linear(self.direction(1.0, rng)).shifted(shift),
            1 => CylinderFunction::quadratic(self.quadratic_matrix(rng))
                .sum(&CylinderFunction::linear(self.direction(0.5, rng)))
                .shifted(shift),
            2 => CylinderFunction::cos_linear(
                self.direction(rng.random_range(0.3..1.5), rng),
                rng.random_range(0.0..std::f64::consts::TAU),
            ),
            3 => CylinderFunction::tanh_linear(self.direction(rng.random_range(0.5..2.0), rng))
                .scaled(rng.random_range(0.5..2.0))
                .shifted(shift),
            4 => CylinderFunction::sin_linear(self.direction(1.0, rng), 0.0)
                .product(&CylinderFunction::linear(self.direction(1.0, rng)))
                .shifted(shift),
            _ => CylinderFunction::cos_linear(self.direction(0.8, rng), 0.0)
                .product(&CylinderFunction::tanh_linear(self.direction(1.0, rng)))
                .sum(&CylinderFunction::constant(n, shift)),
        }
    }

    /// `u + iv` with independently drawn parts.
    pub fn random_complex<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexFunction {
        let re = self.random_real(rng);
        let im = self.random_real(rng);
        ComplexFunction::new(re, im)
    }

    /// Complex quadratic polynomial `½xᵀCx + ⟨x,b⟩ + c` in each part.
    pub fn random_complex_quadratic<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexFunction {
        let mut part = || {
            CylinderFunction::quadratic(self.quadratic_matrix(rng))
                .sum(&CylinderFunction::linear(self.direction(1.0, rng)))
                .shifted(rng.random_range(-1.0..1.0))
        };
        let re = part();
        let im = part();
        ComplexFunction::new(re, im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn directions_have_unit_variance_under_invariant_measure() {
        let m = OuModel::nonnormal().unwrap();
        let s = FunctionSampler::new(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let b = s.direction(1.0, &mut rng);
            let var = b.dot(&(m.q_inf().as_matrix() * &b));
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_functions_have_consistent_derivatives() {
        let m = OuModel::nonnormal().unwrap();
        let s = FunctionSampler::new(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let f = s.random_complex(&mut rng);
            f.re.validate(5, 1).unwrap();
            f.im.validate(5, 2).unwrap();
        }
        for f in s.builtin_family(&mut rng) {
            f.validate(5, 3).unwrap();
        }
    }
}
