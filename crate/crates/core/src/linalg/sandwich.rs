//! `Q_t = ∫₀ᵗ e^{sA} Q e^{sAᵀ} ds` by the block-exponential method.
//!
//! The block matrix `[[A, Q], [0, -Aᵀ]]` is exponentiated only on a short
//! step `τ` with `τ‖A‖₁ ≤ 1/2`; longer horizons are reached by the doubling
//! rule `Q_{2τ} = Q_τ + e^{τA} Q_τ e^{τAᵀ}`, which avoids the `e^{-tAᵀ}`
//! growth of the naive block formula.

use nalgebra::DMatrix;

use super::{matrix_exp, symmetrize, SpdMatrix, StableMatrix};
use crate::error::{Error, Result};

pub fn integrate_sandwich(a: &StableMatrix, q: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("horizon t = {t} must be positive and finite")));
    }
    let n = a.dim();
    if q.dim() != n {
        return Err(Error::Dimension(format!(
            "drift is {n}x{n} but diffusion is {0}x{0}",
            q.dim()
        )));
    }
    let am = a.as_matrix();
    let norm = am.abs().row_sum().max();
    let mut doublings = 0u32;
    let mut tau = t;
    while tau * norm > 0.5 && doublings < 60 {
        tau *= 0.5;
        doublings += 1;
    }

    let mut block = DMatrix::<f64>::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(am);
    block.view_mut((0, n), (n, n)).copy_from(q.as_matrix());
    block.view_mut((n, n), (n, n)).copy_from(&(-am.transpose()));
    let e = matrix_exp(&block, tau)?;
    let mut phi = matrix_exp(am, tau)?;
    let f12 = e.view((0, n), (n, n)).clone_owned();
    let mut qt = symmetrize(&(f12 * phi.transpose()));

    for _ in 0..doublings {
        qt = symmetrize(&(&qt + &phi * &qt * phi.transpose()));
        phi = &phi * &phi;
    }
    SpdMatrix::new(qt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_psd, solve_lyapunov};
    use nalgebra::dmatrix;

    #[test]
    fn scalar_closed_form() {
        let a = StableMatrix::new(dmatrix![-1.0]).unwrap();
        let q = SpdMatrix::new(dmatrix![3.0]).unwrap();
        for &t in &[1e-6, 0.1, 1.0, 5.0, 20.0] {
            let got = integrate_sandwich(&a, &q, t).unwrap().as_matrix()[(0, 0)];
            let exact = 1.5 * (1.0 - (-2.0 * t).exp());
            assert!(
                (got - exact).abs() <= 1e-13 * exact.max(1e-3),
                "t={t}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn short_horizon_vanishes() {
        let a = StableMatrix::new(dmatrix![-1.0, 2.0; -2.0, -1.0]).unwrap();
        let q = SpdMatrix::identity(2);
        let qt = integrate_sandwich(&a, &q, 1e-9).unwrap();
        assert!(qt.as_matrix().norm() < 1e-8);
    }

    #[test]
    fn long_horizon_reaches_lyapunov_solution() {
        let a = StableMatrix::new(dmatrix![-1.0, 3.0; 0.0, -1.5]).unwrap();
        let q = SpdMatrix::new(dmatrix![1.0, 0.2; 0.2, 0.5]).unwrap();
        let qt = integrate_sandwich(&a, &q, 50.0).unwrap();
        let qi = solve_lyapunov(&a, &q).unwrap();
        assert!((qt.as_matrix() - qi.as_matrix()).norm() <= 1e-10);
    }

    #[test]
    fn monotone_in_t_and_below_q_infinity() {
        let a = StableMatrix::new(dmatrix![-0.5, 1.0, 0.0; -1.0, -0.5, 0.3; 0.0, 0.0, -2.0]).unwrap();
        let q = SpdMatrix::new(dmatrix![1.0, 0.1, 0.0; 0.1, 2.0, 0.3; 0.0, 0.3, 1.0]).unwrap();
        let qi = solve_lyapunov(&a, &q).unwrap();
        let mut prev = DMatrix::zeros(3, 3);
        for &t in &[0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let qt = integrate_sandwich(&a, &q, t).unwrap().into_inner();
            assert!(is_psd(&(&qt - &prev), 1e-12), "not monotone at t={t}");
            assert!(is_psd(&(qi.as_matrix() - &qt), 1e-12), "exceeds Q∞ at t={t}");
            prev = qt;
        }
    }

    #[test]
    fn rejects_nonpositive_horizon() {
        let a = StableMatrix::new(dmatrix![-1.0]).unwrap();
        let q = SpdMatrix::identity(1);
        assert!(matches!(integrate_sandwich(&a, &q, 0.0), Err(Error::Domain(_))));
        assert!(matches!(integrate_sandwich(&a, &q, -1.0), Err(Error::Domain(_))));
    }
}
