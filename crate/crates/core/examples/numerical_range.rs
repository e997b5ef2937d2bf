//! `∫[B D_Hf, D_Hf*]_H dν` for random complex functions against the sector
//! of half-angle `θ_p` at several exponents.

use ou_sector::calculus::FunctionSampler;
use ou_sector::measure::{WeightFunction, WeightedMeasure};
use ou_sector::model::{HGeometry, OuModel};
use ou_sector::sector::numerical_range_profile;
use ou_sector::Tolerances;
use rand::SeedableRng;

fn main() -> ou_sector::Result<()> {
    let m = OuModel::rotation(0.8)?;
    let g = HGeometry::new(m.clone())?;
    let w = WeightedMeasure::new(m.clone(), WeightFunction::log_cosh(nalgebra::dvector![0.5, 0.5]))?;
    let samples = w.sample(100_000, 11)?;
    let sampler = FunctionSampler::new(&m);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let ps = [1.5, 2.0, 4.0, 8.0];
    for k in 0..3 {
        let f = sampler.random_complex(&mut rng);
        for r in numerical_range_profile(&g, &samples, &f, &ps, &Tolerances::default())? {
            println!(
                "f{k} p = {:<4} value = {:+.5} {:+.5}i, |Im|/(-Re) = {:.4} <= cot = {:.4}, margin {:+.2e} (se {:.1e})",
                r.p,
                r.re,
                r.im,
                r.im.abs() / -r.re,
                r.c_theta,
                r.margin,
                r.std_error
            );
        }
    }
    Ok(())
}
