//! Field of values of the generator restricted to Hermite polynomials of
//! degree two, against the sector for each exponent.

use ou_sector::measure::WeightedMeasure;
use ou_sector::model::{HGeometry, OuModel};
use ou_sector::sector::{assemble_galerkin, field_of_values, GalerkinOptions, DEFAULT_FOV_ANGLES};

fn main() -> ou_sector::Result<()> {
    let m = OuModel::nonnormal()?;
    let g = HGeometry::new(m.clone())?;
    let w = WeightedMeasure::unweighted(m);
    let sys = assemble_galerkin(&g, &w, &GalerkinOptions::new(2, 0, 0))?;
    println!("{} basis functions, spectrum:", sys.len());
    for z in sys.spectrum()? {
        println!("  {:+.6} {:+.6}i", z.re, z.im);
    }
    for p in [1.5, 2.0, 4.0, 8.0] {
        let fov = field_of_values(&sys.m, &sys.gram, DEFAULT_FOV_ANGLES, &g.sector_params(p)?)?;
        println!(
            "p = {p:<4} theta = {:.4}: support margin {:+.3e}, contained {}",
            fov.theta, fov.support_margin, fov.contained
        );
    }
    Ok(())
}
