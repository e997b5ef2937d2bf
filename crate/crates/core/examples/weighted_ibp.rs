//! Integration by parts under `e^{-U} μ∞` for a log-cosh weight, along
//! the directions `Q x*` and `B Q x*`.

use nalgebra::dvector;
use ou_sector::calculus::CylinderFunction;
use ou_sector::measure::{check_ibp, WeightFunction, WeightedMeasure};
use ou_sector::model::{HGeometry, OuModel};

fn main() -> ou_sector::Result<()> {
    let m = OuModel::rotation(1.2)?;
    let g = HGeometry::new(m.clone())?;
    let w = WeightedMeasure::new(m, WeightFunction::log_cosh(dvector![1.0, -0.5]))?;
    let f = CylinderFunction::sin_linear(dvector![0.6, 0.9], 0.2);
    let xs = dvector![1.0, 0.3];
    let q = g.model().diffusion().as_matrix();
    for (label, h) in [("Q x*", q * &xs), ("B Q x*", g.b() * (q * &xs))] {
        let r = check_ibp(&w, &g, &f, &h, 200_000, 1);
        println!(
            "h = {label}: lhs {:.5}, rhs {:.5}, |diff| = {:.2e} <= {:.2e}: {}",
            r.metrics["lhs"], r.metrics["rhs"], r.statistic, r.bound, r.passed
        );
    }
    Ok(())
}
