//! Dense real linear-algebra kernels: matrix exponential, Lyapunov solve,
//! exponential-sandwich integrals and SPD square roots.
//!
//! Matrices are plain [`nalgebra::DMatrix<f64>`]; the newtypes [`SpdMatrix`]
//! and [`StableMatrix`] certify the two structural properties the rest of the
//! crate relies on.

mod expm;
mod lyapunov;
pub mod quadrature;
mod sandwich;

pub use expm::matrix_exp;
pub use lyapunov::solve_lyapunov;
pub use sandwich::integrate_sandwich;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;

/// Eigenvalues with real part above this are rejected as not stable.
pub const STABILITY_MARGIN: f64 = -1e-12;

/// Relative tolerance for the symmetry of [`SpdMatrix`] input.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric positive definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        require_square(&m, "SPD matrix")?;
        require_finite(&m)?;
        let scale = max_abs(&m).max(f64::MIN_POSITIVE);
        let asym = max_abs(&(&m - m.transpose()));
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Definiteness(format!(
                "matrix is not symmetric (max |M - M^T| = {asym:.3e}, scale {scale:.3e})"
            )));
        }
        let m = symmetrize(&m);
        let min_eig = m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min_eig > 0.0) {
            return Err(Error::Definiteness(format!(
                "smallest eigenvalue {min_eig:.6e} is not positive"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let chol = self.0.clone().cholesky().expect("SPD matrix admits a Cholesky factor");
        symmetrize(&chol.inverse())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.0 * c)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Square matrix whose spectrum lies in `{Re z < -1e-12}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StableMatrix {
    m: DMatrix<f64>,
    abscissa: f64,
}

impl StableMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        require_square(&m, "drift matrix")?;
        require_finite(&m)?;
        let eig = eigenvalues(&m);
        let worst = eig
            .iter()
            .cloned()
            .max_by(|a, b| a.re.total_cmp(&b.re))
            .expect("non-empty matrix");
        if !(worst.re < STABILITY_MARGIN) {
            return Err(Error::Unstable {
                re: worst.re,
                im: worst.im,
            });
        }
        Ok(Self { m, abscissa: worst.re })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Largest real part of the spectrum (negative).
    pub fn spectral_abscissa(&self) -> f64 {
        self.abscissa
    }

    /// Spectral gap `-max Re λ`.
    pub fn gap(&self) -> f64 {
        -self.abscissa
    }
}

pub(crate) fn require_square(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn require_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a general real matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.clone().complex_eigenvalues().iter().cloned().collect()
}

/// Spectral norm (largest singular value).
pub fn op_norm2(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Unique SPD square root `R` with `R·R = S`.
pub fn spd_sqrt(s: &SpdMatrix) -> SpdMatrix {
    let eig = SymmetricEigen::new(s.as_matrix().clone());
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let r = &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose();
    SpdMatrix(symmetrize(&r))
}

/// Inverse of the SPD square root.
pub fn spd_inv_sqrt(s: &SpdMatrix) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(s.as_matrix().clone());
    let d = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    symmetrize(&(&eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()))
}

/// Is `m` positive semidefinite up to `tol` (smallest eigenvalue of the
/// symmetric part at least `-tol`)?
pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    symmetrize(m).symmetric_eigenvalues().iter().all(|&l| l >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn spd_rejects_asymmetric_and_indefinite() {
        assert!(matches!(
            SpdMatrix::new(dmatrix![1.0, 0.5; 0.0, 1.0]),
            Err(Error::Definiteness(_))
        ));
        assert!(matches!(
            SpdMatrix::new(dmatrix![1.0, 0.0; 0.0, -1.0]),
            Err(Error::Definiteness(_))
        ));
        assert!(matches!(
            SpdMatrix::new(dmatrix![1.0, 0.0; 0.0, 0.0]),
            Err(Error::Definiteness(_))
        ));
        assert!(matches!(SpdMatrix::new(DMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn stable_rejects_borderline_spectrum() {
        assert!(StableMatrix::new(dmatrix![-1.0, 0.0; 0.0, -2.0]).is_ok());
        match StableMatrix::new(dmatrix![0.0, 1.0; -1.0, 0.0]) {
            Err(Error::Unstable { re, im }) => {
                assert!(re.abs() < 1e-12);
                assert!((im.abs() - 1.0).abs() < 1e-12);
            }
            other => panic!("expected instability, got {other:?}"),
        }
        assert!(StableMatrix::new(dmatrix![-1.0, 0.0; 0.0, 0.5]).is_err());
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = SpdMatrix::identity(3);
        assert_eq!(spd_sqrt(&id).as_matrix(), id.as_matrix());
        let d = SpdMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let r = spd_sqrt(&d);
        assert!((r.as_matrix() - dmatrix![2.0, 0.0; 0.0, 3.0]).norm() < 1e-14);
    }

    #[test]
    fn sqrt_residual_on_random_spd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8 {
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let s = SpdMatrix::new(symmetrize(&(&g * g.transpose())) + DMatrix::identity(n, n) * 0.1).unwrap();
            let r = spd_sqrt(&s);
            let res = (r.as_matrix() * r.as_matrix() - s.as_matrix()).norm() / s.as_matrix().norm();
            assert!(res <= 1e-10, "n={n} residual {res:e}");
            let ri = spd_inv_sqrt(&s);
            assert!((r.as_matrix() * ri - DMatrix::identity(n, n)).norm() < 1e-9);
        }
    }
}
