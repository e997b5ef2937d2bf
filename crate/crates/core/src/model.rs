//! The Ornstein–Uhlenbeck model `(A, Q, Q∞)` and its Cameron–Martin
//! geometry.
//!
//! The RKHS `H` of `Q` is realized as `ℝⁿ` with Gram matrix `Q⁻¹`
//! (`[h, k]_H = hᵀQ⁻¹k`), the Cameron–Martin space `H∞` of `Q∞` as `ℝⁿ` with
//! Gram matrix `Q∞⁻¹`, and the embeddings `i*`, `i∞*` as the matrices `Q`,
//! `Q∞`. The drift operator is `B = Q∞AᵀQ⁻¹` and `V = QQ∞⁻¹`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, max_abs, op_norm2, solve_lyapunov, spd_inv_sqrt, spd_sqrt, symmetrize, SpdMatrix, StableMatrix,
};
use crate::report::CheckReport;

/// Stable drift with SPD diffusion and the solved stationary covariance.
#[derive(Clone, Debug)]
pub struct OuModel {
    a: StableMatrix,
    q: SpdMatrix,
    q_inf: SpdMatrix,
    lyapunov_residual: f64,
}

impl OuModel {
    pub fn new(a: StableMatrix, q: SpdMatrix) -> Result<Self> {
        if a.dim() != q.dim() {
            return Err(Error::Dimension(format!(
                "drift is {0}x{0} but diffusion is {1}x{1}",
                a.dim(),
                q.dim()
            )));
        }
        let q_inf = solve_lyapunov(&a, &q)?;
        let res = linalg_residual(a.as_matrix(), q_inf.as_matrix(), q.as_matrix());
        Ok(Self {
            a,
            q,
            q_inf,
            lyapunov_residual: res,
        })
    }

    /// Builds the model from raw matrices.
    pub fn from_matrices(a: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        Self::new(StableMatrix::new(a)?, SpdMatrix::new(q)?)
    }

    /// `A = [[-1, α], [-α, -1]]`, `Q = 2·Id`; here `Q∞ = Id` and `γ = |α|`.
    pub fn rotation(alpha: f64) -> Result<Self> {
        Self::from_matrices(
            DMatrix::from_row_slice(2, 2, &[-1.0, alpha, -alpha, -1.0]),
            DMatrix::identity(2, 2) * 2.0,
        )
    }

    /// `A = -Id`, `Q = Id` in dimension `n`.
    pub fn isotropic(n: usize) -> Result<Self> {
        Self::from_matrices(-DMatrix::identity(n, n), DMatrix::identity(n, n))
    }

    /// Diagonal drift and diffusion.
    pub fn diagonal(drift: &[f64], diffusion: &[f64]) -> Result<Self> {
        Self::from_matrices(
            DMatrix::from_diagonal(&DVector::from_column_slice(drift)),
            DMatrix::from_diagonal(&DVector::from_column_slice(diffusion)),
        )
    }

    /// A fixed three-dimensional nonnormal system with non-commuting `A`, `Q`.
    pub fn nonnormal() -> Result<Self> {
        Self::from_matrices(
            DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, -0.5, -1.5, 1.0, 0.0, -1.0, -2.0]),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, 0.8, -0.2, 0.0, -0.2, 1.5]),
        )
    }

    /// Random stable system: `A = -S + K` with `S` SPD and `K` antisymmetric,
    /// `Q` random SPD.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let g = gaussian_matrix(n, n, rng);
        let s = symmetrize(&(&g * g.transpose())) / n as f64 + DMatrix::identity(n, n) * rng.random_range(0.2..1.0);
        let k_scale = rng.random_range(0.0..3.0);
        let k = gaussian_matrix(n, n, rng) * k_scale;
        let a = -s + (&k - k.transpose()) * 0.5;
        let h = gaussian_matrix(n, n, rng);
        let q = symmetrize(&(&h * h.transpose())) / n as f64 + DMatrix::identity(n, n) * rng.random_range(0.1..1.0);
        Self::from_matrices(a, q)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn drift(&self) -> &StableMatrix {
        &self.a
    }

    pub fn diffusion(&self) -> &SpdMatrix {
        &self.q
    }

    pub fn q_inf(&self) -> &SpdMatrix {
        &self.q_inf
    }

    /// `max |A Q∞ + Q∞ Aᵀ + Q|`.
    pub fn lyapunov_residual(&self) -> f64 {
        self.lyapunov_residual
    }

    /// Same drift with diffusion scaled by `c > 0`.
    pub fn with_scaled_diffusion(&self, c: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.q.scaled(c)?)
    }
}

fn linalg_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    max_abs(&(a * x + x * a.transpose() + q))
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(r: usize, c: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub(crate) fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Build the model from matrices; alias kept for the operation name.
pub fn build_model(a: StableMatrix, q: SpdMatrix) -> Result<OuModel> {
    OuModel::new(a, q)
}

/// Sector parameters for one exponent `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorParams {
    pub p: f64,
    /// Half-opening angle `θ_p ∈ (0, π/2]`.
    pub theta: f64,
    /// `C_θ = cot θ_p`.
    pub c_theta: f64,
}

/// `cot θ_p = √((p−2)² + p²γ²) / (2√(p−1))`.
pub fn sector_params(gamma: f64, p: f64) -> Result<SectorParams> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must exceed 1 (got {p})")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("γ must be nonnegative (got {gamma})")));
    }
    let c_theta = ((p - 2.0).powi(2) + p * p * gamma * gamma).sqrt() / (2.0 * (p - 1.0).sqrt());
    let theta = if c_theta == 0.0 {
        FRAC_PI_2
    } else {
        (1.0 / c_theta).atan()
    };
    Ok(SectorParams { p, theta, c_theta })
}

/// Cameron–Martin data derived from a model.
#[derive(Clone, Debug)]
pub struct HGeometry {
    model: OuModel,
    /// `Q⁻¹`, Gram matrix of `H`.
    gram_inv: DMatrix<f64>,
    /// `Q∞⁻¹`, Gram matrix of `H∞`.
    gram_inf_inv: DMatrix<f64>,
    b: DMatrix<f64>,
    b_adj: DMatrix<f64>,
    v: DMatrix<f64>,
    v_adj: DMatrix<f64>,
    q_sqrt: DMatrix<f64>,
    q_inv_sqrt: DMatrix<f64>,
    gamma: f64,
    b_norm: f64,
    drift_residual: f64,
    domv_residual: f64,
}

/// Entrywise bound on `B + B^♯ + Id` enforced at construction.
pub const DRIFT_ALGEBRA_TOL: f64 = 1e-9;

impl HGeometry {
    pub fn new(model: OuModel) -> Result<Self> {
        let q = model.diffusion().as_matrix().clone();
        let q_inf = model.q_inf().as_matrix().clone();
        let a = model.drift().as_matrix();
        let n = model.dim();
        let gram_inv = model.diffusion().inverse();
        let gram_inf_inv = q_inf
            .clone()
            .cholesky()
            .map(|c| symmetrize(&c.inverse()))
            .ok_or_else(|| Error::Definiteness("Q∞ is singular".into()))?;

        let b = &q_inf * a.transpose() * &gram_inv;
        let b_adj = &q * b.transpose() * &gram_inv;
        let v = &q * &gram_inf_inv;
        let v_adj = &q_inf * v.transpose() * &gram_inv;

        let q_sqrt = spd_sqrt(model.diffusion()).into_inner();
        let q_inv_sqrt = spd_inv_sqrt(model.diffusion());

        let id = DMatrix::<f64>::identity(n, n);
        let drift_residual = max_abs(&(&b + &b_adj + &id));
        if drift_residual > DRIFT_ALGEBRA_TOL {
            return Err(Error::Accuracy(format!("B + B^♯ + Id has entry {drift_residual:.3e}")));
        }
        let v_adj_residual = max_abs(&(&v_adj - &id));
        if v_adj_residual > DRIFT_ALGEBRA_TOL * (1.0 + max_abs(&v)) {
            return Err(Error::Accuracy(format!(
                "V^♯ differs from the identity by {v_adj_residual:.3e}"
            )));
        }

        // B·Q·x* = Q∞·Aᵀ·x* on sampled x*.
        let mut rng = ChaCha8Rng::seed_from_u64(0x0d0a_1e55);
        let mut domv_residual = 0.0_f64;
        for _ in 0..16 {
            let xs = gaussian_vector(n, &mut rng);
            let lhs = &b * (&q * &xs);
            let rhs = &q_inf * (a.transpose() * &xs);
            let scale = rhs.norm().max(lhs.norm()).max(f64::MIN_POSITIVE);
            domv_residual = domv_residual.max((lhs - rhs).norm() / scale);
        }
        if domv_residual > 1e-8 {
            return Err(Error::Accuracy(format!(
                "B·Q·x* ≠ Q∞·Aᵀ·x* (relative residual {domv_residual:.3e})"
            )));
        }

        let to_h = |m: &DMatrix<f64>| &q_inv_sqrt * m * &q_sqrt;
        let gamma = op_norm2(&to_h(&(&b - &b_adj)));
        let b_norm = op_norm2(&to_h(&b));

        Ok(Self {
            model,
            gram_inv,
            gram_inf_inv,
            b,
            b_adj,
            v,
            v_adj,
            q_sqrt,
            q_inv_sqrt,
            gamma,
            b_norm,
            drift_residual,
            domv_residual,
        })
    }

    pub fn model(&self) -> &OuModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    pub fn gram_inf_inv(&self) -> &DMatrix<f64> {
        &self.gram_inf_inv
    }

    /// Drift operator `B = Q∞AᵀQ⁻¹`.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `H`-adjoint `B^♯ = QBᵀQ⁻¹`.
    pub fn b_adj(&self) -> &DMatrix<f64> {
        &self.b_adj
    }

    /// `V = QQ∞⁻¹` (from `H∞` to `H`).
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// `V^♯ = Q∞VᵀQ⁻¹`, the identity up to round-off.
    pub fn v_adj(&self) -> &DMatrix<f64> {
        &self.v_adj
    }

    /// `γ = ‖B − B^♯‖_{L(H)}`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn drift_residual(&self) -> f64 {
        self.drift_residual
    }

    pub fn domv_residual(&self) -> f64 {
        self.domv_residual
    }

    /// `[h, k]_H = hᵀQ⁻¹k`.
    pub fn bracket(&self, h: &DVector<f64>, k: &DVector<f64>) -> f64 {
        h.dot(&(&self.gram_inv * k))
    }

    /// Bilinear (unconjugated) extension of the `H` bracket to complex vectors.
    pub fn bracket_c(&self, h: &DVector<Complex<f64>>, k: &DVector<Complex<f64>>) -> Complex<f64> {
        let n = self.dim();
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex::new(0.0, 0.0);
            for j in 0..n {
                row += k[j] * self.gram_inv[(i, j)];
            }
            acc += h[i] * row;
        }
        acc
    }

    pub fn h_norm_sq(&self, h: &DVector<f64>) -> f64 {
        self.bracket(h, h)
    }

    pub fn h_norm(&self, h: &DVector<f64>) -> f64 {
        self.h_norm_sq(h).max(0.0).sqrt()
    }

    /// `‖M‖_{L(H)} = ‖Q^{-1/2} M Q^{1/2}‖₂`.
    pub fn op_norm_h(&self, m: &DMatrix<f64>) -> f64 {
        op_norm2(&(&self.q_inv_sqrt * m * &self.q_sqrt))
    }

    /// `H`-adjoint `QMᵀQ⁻¹`.
    pub fn adjoint_h(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.model.diffusion().as_matrix() * m.transpose() * &self.gram_inv
    }

    /// `c = ‖B‖_{L(H)}`, the best constant with `|Q∞Aᵀx*|_H ≤ c|Qx*|_H`.
    pub fn rkhs_constant(&self) -> f64 {
        self.b_norm
    }

    pub fn sector_params(&self, p: f64) -> Result<SectorParams> {
        sector_params(self.gamma, p)
    }

    /// Verifies `|Q∞Aᵀx*|_H ≤ c|Qx*|_H` on random `x*`.
    pub fn check_rkhs_bound(&self, samples: usize, seed: u64) -> CheckReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = self.model.diffusion().as_matrix();
        let qi = self.model.q_inf().as_matrix();
        let at = self.model.drift().as_matrix().transpose();
        let c = self.rkhs_constant();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let xs = gaussian_vector(self.dim(), &mut rng);
            let lhs = self.h_norm(&(qi * &at * &xs));
            let rhs = c * self.h_norm(&(q * &xs));
            worst = worst.max((lhs - rhs) / rhs.max(f64::MIN_POSITIVE));
        }
        CheckReport::at_most("rkhs_bound", worst, 1e-10)
            .with_samples(samples, seed)
            .metric("c", c)
    }

    /// Drift-operator algebra: `B + B^♯ = −Id` and `[Bh, h]_H = −½|h|²_H`.
    pub fn check_drift_algebra(&self, probes: usize, seed: u64, tol: f64) -> CheckReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..probes {
            let h = gaussian_vector(self.dim(), &mut rng);
            let lhs = self.bracket(&(&self.b * &h), &h);
            let rhs = -0.5 * self.h_norm_sq(&h);
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
        }
        let n = self.dim();
        let half = self.op_norm_h(&(&self.b + DMatrix::<f64>::identity(n, n) * 0.5));
        CheckReport::all(
            "drift_algebra",
            vec![
                CheckReport::at_most("b_plus_b_adj_plus_id", self.drift_residual, tol),
                CheckReport::at_most("quadratic_form_relative", worst, tol).with_samples(probes, seed),
                CheckReport::at_most(
                    "half_shift_norm_vs_gamma",
                    (half - 0.5 * self.gamma).abs(),
                    1e-10 * (1.0 + self.gamma),
                ),
            ],
        )
    }
}

/// Convenience wrapper matching the operation name.
pub fn h_geometry(model: OuModel) -> Result<HGeometry> {
    HGeometry::new(model)
}

/// Exposed so callers can reuse the tolerance vocabulary.
pub use linalg::STABILITY_MARGIN;
