//! Coercivity, the sector condition and generator duality of the
//! Dirichlet form on one shared weighted sample.

use nalgebra::DMatrix;
use ou_sector::calculus::FunctionSampler;
use ou_sector::forms::FormChecks;
use ou_sector::measure::{WeightFunction, WeightedMeasure};
use ou_sector::model::{HGeometry, OuModel};
use ou_sector::Tolerances;
use rand::SeedableRng;

fn main() -> ou_sector::Result<()> {
    let m = OuModel::nonnormal()?;
    let g = HGeometry::new(m.clone())?;
    let w = WeightedMeasure::new(m.clone(), WeightFunction::quadratic(DMatrix::identity(3, 3) * 0.4)?)?;
    let samples = w.sample(100_000, 3)?;
    let fc = FormChecks::new(&g, &w, &samples, Tolerances::default());
    let family = FunctionSampler::new(&m).builtin_family(&mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
    for u in &family {
        let c = fc.coercivity(u);
        println!(
            "coercivity {:<14} residual {:.1e} pass {}",
            u.name(),
            c.statistic,
            c.passed
        );
    }
    for (u, v) in family.iter().zip(family.iter().skip(1)) {
        let d = fc.generator_duality(u, v, false);
        let s = fc.sector_condition(u, v);
        println!(
            "duality {:<14}/{:<14} pass {}, sector condition pass {}",
            u.name(),
            v.name(),
            d.passed,
            s.passed
        );
    }
    Ok(())
}
