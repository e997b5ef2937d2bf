//! Continuous Lyapunov equation `A X + X Aᵀ + Q = 0` by Bartels–Stewart on
//! the real Schur form of `A`.

use nalgebra::{DMatrix, DVector};

use super::{max_abs, symmetrize, SpdMatrix, StableMatrix};
use crate::error::{Error, Result};

/// Residual bound relative to `‖Q‖` enforced on every solve.
pub const LYAPUNOV_TOL: f64 = 1e-10;

/// Solves `A X + X Aᵀ = -Q` and returns the stationary covariance
/// `Q∞ = ∫₀^∞ e^{tA} Q e^{tAᵀ} dt`.
pub fn solve_lyapunov(a: &StableMatrix, q: &SpdMatrix) -> Result<SpdMatrix> {
    let n = a.dim();
    if q.dim() != n {
        return Err(Error::Dimension(format!(
            "drift is {n}x{n} but diffusion is {0}x{0}",
            q.dim()
        )));
    }
    let am = a.as_matrix();
    let qm = q.as_matrix();
    let mut x = solve_sylvester_schur(am, &(-qm))?;
    x = symmetrize(&x);

    // One step of iterative refinement when the residual is marginal.
    let scale = max_abs(qm).max(f64::MIN_POSITIVE);
    let mut res = residual(am, &x, qm);
    if max_abs(&res) > 0.1 * LYAPUNOV_TOL * scale {
        let dx = solve_sylvester_schur(am, &(-&res))?;
        x = symmetrize(&(x + dx));
        res = residual(am, &x, qm);
    }
    let r = max_abs(&res);
    if r > LYAPUNOV_TOL * scale {
        return Err(Error::Accuracy(format!(
            "Lyapunov residual {r:.3e} exceeds {:.1e}·‖Q‖",
            LYAPUNOV_TOL
        )));
    }
    SpdMatrix::new(x)
}

/// `A X + X Aᵀ + Q`.
pub fn residual(a: &DMatrix<f64>, x: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    a * x + x * a.transpose() + q
}

/// Solves `A X + X Aᵀ = C` for general `C`.
fn solve_sylvester_schur(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let (u, t) = a.clone().schur().unpack();
    let cc = u.transpose() * c * &u;
    let blocks = diagonal_blocks(&t);
    let mut y = DMatrix::<f64>::zeros(n, n);

    for bi in (0..blocks.len()).rev() {
        let (i0, pi) = blocks[bi];
        for bj in (0..blocks.len()).rev() {
            let (j0, pj) = blocks[bj];
            // R = C_IJ - Σ_{K>I} T_IK Y_KJ - Σ_{K>J} Y_IK T_JKᵀ
            let mut r = cc.view((i0, j0), (pi, pj)).clone_owned();
            let after_i = i0 + pi;
            if after_i < n {
                let tik = t.view((i0, after_i), (pi, n - after_i));
                let ykj = y.view((after_i, j0), (n - after_i, pj));
                r -= tik * ykj;
            }
            let after_j = j0 + pj;
            if after_j < n {
                let yik = y.view((i0, after_j), (pi, n - after_j));
                let tjk = t.view((j0, after_j), (pj, n - after_j));
                r -= yik * tjk.transpose();
            }
            let tii = t.view((i0, i0), (pi, pi)).clone_owned();
            let tjj = t.view((j0, j0), (pj, pj)).clone_owned();
            let block = small_sylvester(&tii, &tjj, &r)?;
            y.view_mut((i0, j0), (pi, pj)).copy_from(&block);
        }
    }
    Ok(&u * y * u.transpose())
}

/// `(start, size)` of the 1×1 and 2×2 diagonal blocks of a quasi-triangular
/// matrix.
fn diagonal_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        let coupled = k + 1 < n && {
            let sub = t[(k + 1, k)].abs();
            sub > f64::EPSILON * (t[(k, k)].abs() + t[(k + 1, k + 1)].abs())
        };
        if coupled {
            out.push((k, 2));
            k += 2;
        } else {
            out.push((k, 1));
            k += 1;
        }
    }
    out
}

/// Solves `T_I Y + Y T_Jᵀ = R` for blocks of size ≤ 2 by Kronecker expansion.
fn small_sylvester(ti: &DMatrix<f64>, tj: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (p, q) = (ti.nrows(), tj.nrows());
    let m = p * q;
    // column-major vec: vec(T_I Y) = (I ⊗ T_I) vec Y, vec(Y T_Jᵀ) = (T_J ⊗ I) vec Y
    let k = DMatrix::from_fn(m, m, |row, col| {
        let (ri, rj) = (row % p, row / p);
        let (ci, cj) = (col % p, col / p);
        let mut v = 0.0;
        if rj == cj {
            v += ti[(ri, ci)];
        }
        if ri == ci {
            v += tj[(rj, cj)];
        }
        v
    });
    let rhs = DVector::from_column_slice(r.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Conditioning("Lyapunov operator is singular on a Schur block".into()))?;
    Ok(DMatrix::from_column_slice(p, q, sol.as_slice()))
}
