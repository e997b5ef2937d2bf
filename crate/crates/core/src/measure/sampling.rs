//! Block-seeded Gaussian draws.
//!
//! Block `k` of a run with seed `s` always uses stream `k` of
//! `ChaCha8(s)`, so the draws do not depend on how many threads run.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::linalg::spd_sqrt;
use crate::model::OuModel;

pub const BLOCK_SIZE: usize = 4096;

/// `n` draws of `L ξ` with `ξ ~ N(0, Id)`.
pub fn sample_with_factor(factor: &DMatrix<f64>, n: usize, seed: u64) -> Vec<DVector<f64>> {
    let dim = factor.ncols();
    let blocks = n.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block as u64);
            let len = BLOCK_SIZE.min(n - block * BLOCK_SIZE);
            (0..len)
                .map(|_| {
                    let xi = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                    factor * xi
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `n` i.i.d. draws from `μ∞ = N(0, Q∞)`.
pub fn sample_gaussian(model: &OuModel, n: usize, seed: u64) -> Vec<DVector<f64>> {
    let root = spd_sqrt(model.q_inf());
    sample_with_factor(root.as_matrix(), n, seed)
}
