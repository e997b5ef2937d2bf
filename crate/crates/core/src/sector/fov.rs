//! Field of values `{v*Mv / v*Gv}` and its containment in the sector
//! `|Im z| ≤ −C_θ Re z`.
//!
//! Boundary points come from the top eigenvector of the Hermitian part of
//! `e^{iφ}K`, `K = G^{-1/2}MG^{-1/2}`. Containment is decided exactly from
//! the two support values normal to the sector's edges; the sampled
//! boundary is reported for plotting.

use std::f64::consts::TAU;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spd_inv_sqrt, SpdMatrix};
use crate::model::SectorParams;

pub const DEFAULT_FOV_ANGLES: usize = 720;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FovReport {
    pub boundary: Vec<Complex<f64>>,
    pub theta: f64,
    pub c_theta: f64,
    /// `max (|Im z| + C_θ Re z)` over the whole field of values.
    pub support_margin: f64,
    /// `max |Im z|` over the sampled boundary.
    pub max_abs_im: f64,
    pub tolerance: f64,
    pub contained: bool,
}

/// Largest eigenvalue of `Re(e^{iφ}K)` with its unit eigenvector's Rayleigh
/// quotient `v*Kv`.
fn support(k: &DMatrix<Complex<f64>>, phi: f64) -> (f64, Complex<f64>) {
    let rot = Complex::from_polar(1.0, phi);
    let h = (k * rot + k.adjoint() * rot.conj()) * Complex::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let (idx, lam) =
        eig.eigenvalues.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc },
        );
    let v = eig.eigenvectors.column(idx);
    let z = (v.adjoint() * k * v)[(0, 0)];
    (lam, z)
}

pub fn field_of_values(m: &DMatrix<f64>, g: &DMatrix<f64>, angles: usize, sector: &SectorParams) -> Result<FovReport> {
    if !m.is_square() || m.shape() != g.shape() {
        return Err(Error::Dimension(format!(
            "M is {}x{} and G is {}x{}",
            m.nrows(),
            m.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    let g = SpdMatrix::new(g.clone()).map_err(|e| Error::Conditioning(format!("G: {e}")))?;
    let w = spd_inv_sqrt(&g);
    let k = (&w * m * &w).map(|v| Complex::new(v, 0.0));
    let angles = angles.max(4);
    let boundary: Vec<Complex<f64>> = (0..angles)
        .map(|j| support(&k, TAU * j as f64 / angles as f64).1)
        .collect();
    let c = sector.c_theta;
    // max(Im z + C Re z) and max(−Im z + C Re z) are support values at the
    // angles whose rotation maps those functionals to Re.
    let norm = (1.0 + c * c).sqrt();
    let upper = support(&k, (-1.0f64).atan2(c)).0 * norm;
    let lower = support(&k, 1.0f64.atan2(c)).0 * norm;
    let support_margin = upper.max(lower);
    let max_abs_im = boundary.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let tolerance = 1e-8 * k.iter().map(|z| z.norm()).fold(1.0, f64::max);
    Ok(FovReport {
        boundary,
        theta: sector.theta,
        c_theta: c,
        support_margin,
        max_abs_im,
        tolerance,
        contained: support_margin <= tolerance,
    })
}
