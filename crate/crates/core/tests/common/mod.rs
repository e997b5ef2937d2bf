//! Test-side reference computations, written directly from the definitions
//! and sharing no code with the library beyond the model data.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use ou_sector::calculus::{ComplexFunction, CylinderFunction};
use ou_sector::measure::WeightFunction;
use ou_sector::model::OuModel;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn normal_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn inv(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().try_inverse().expect("invertible")
}

/// Symmetric square root by eigendecomposition.
pub fn sqrt_spd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = nalgebra::SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f64::sqrt));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// `B = Q∞ Aᵀ Q⁻¹`.
pub fn drift_b(m: &OuModel) -> DMatrix<f64> {
    m.q_inf().as_matrix() * m.drift().as_matrix().transpose() * inv(m.diffusion().as_matrix())
}

/// `H`-adjoint `Q Mᵀ Q⁻¹`.
pub fn h_adjoint(m: &OuModel, b: &DMatrix<f64>) -> DMatrix<f64> {
    let q = m.diffusion().as_matrix();
    q * b.transpose() * inv(q)
}

/// `‖M‖_{L(H)} = ‖Q^{-1/2} M Q^{1/2}‖₂`.
pub fn h_op_norm(m: &OuModel, b: &DMatrix<f64>) -> f64 {
    let r = sqrt_spd(m.diffusion().as_matrix());
    let t = inv(&r) * b * &r;
    t.singular_values().max()
}

/// `½Tr(Q∇²u) + ⟨Ax, ∇u⟩ + ⟨BQ∇u, ∇U⟩`.
pub fn generator(m: &OuModel, b: &DMatrix<f64>, w: &WeightFunction, u: &CylinderFunction, x: &DVector<f64>) -> f64 {
    let q = m.diffusion().as_matrix();
    let grad = u.gradient(x);
    let hess = u.hessian(x);
    0.5 * (q * hess).trace() + (m.drift().as_matrix() * x).dot(&grad) + (b * q * &grad).dot(&w.gradient(x))
}

/// `∇(f̄|f|^{p−2})` from the real and imaginary parts.
pub fn dual_gradient(f: &ComplexFunction, p: f64, x: &DVector<f64>) -> DVector<Complex<f64>> {
    let (u, v) = (f.re.value(x), f.im.value(x));
    let (gu, gv) = (f.re.gradient(x), f.im.gradient(x));
    let r2 = u * u + v * v;
    let rp2 = r2.powf(0.5 * (p - 2.0));
    let rp4 = r2.powf(0.5 * (p - 4.0));
    let radial = (&gu * u + &gv * v) * ((p - 2.0) * rp4);
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| Complex::new(gu[i] * rp2 + u * radial[i], -gv[i] * rp2 - v * radial[i])),
    )
}

/// Deterministic seed stream for test loops.
pub fn seeds(base: u64) -> impl Iterator<Item = u64> {
    (0u64..).map(move |i| {
        base.wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(i.wrapping_mul(0xbf58_476d_1ce4_e5b9))
    })
}

/// Gauss–Legendre nodes and weights on `[a, b]` by the Golub–Welsch method.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = beta;
        j[(k, k - 1)] = beta;
    }
    let e = nalgebra::SymmetricEigen::new(j);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let nodes = e.eigenvalues.iter().map(|t| mid + half * t).collect();
    let weights = (0..n).map(|i| 2.0 * e.eigenvectors[(0, i)].powi(2) * half).collect();
    (nodes, weights)
}

/// `∫₀ᵀ e^{sA} Q e^{sAᵀ} ds` with nalgebra's matrix exponential and
/// Gauss–Legendre panels of doubling width.
pub fn sandwich_oracle(a: &DMatrix<f64>, q: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    sandwich_oracle_with(a, q, t, 48, 0.125)
}

pub fn sandwich_oracle_with(a: &DMatrix<f64>, q: &DMatrix<f64>, t: f64, order: usize, first: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let mut acc = DMatrix::zeros(n, n);
    let mut lo = 0.0;
    let mut h = first / a.norm().max(1e-12);
    while lo < t {
        let hi = (lo + h).min(t);
        let (nodes, weights) = gauss_legendre(order, lo, hi);
        for (s, w) in nodes.iter().zip(&weights) {
            let e = (a * *s).exp();
            acc += &e * q * e.transpose() * *w;
        }
        lo = hi;
        h *= 2.0;
    }
    (&acc + acc.transpose()) * 0.5
}
