//! Builds the built-in models and prints `Q∞`, the drift operator `B`, its
//! antisymmetry `γ` and the sector angle `θ_p` for a few exponents.

use ou_sector::model::{HGeometry, OuModel};

fn main() -> ou_sector::Result<()> {
    let models = [
        ("rotation(0.5)", OuModel::rotation(0.5)?),
        ("isotropic(2)", OuModel::isotropic(2)?),
        ("nonnormal", OuModel::nonnormal()?),
    ];
    for (name, m) in models {
        let g = HGeometry::new(m)?;
        println!("== {name}");
        println!("Q_inf = {:.6}", g.model().q_inf().as_matrix());
        println!("B = {:.6}", g.b());
        println!("|B + B# + Id|_H = {:.2e}", g.drift_residual());
        println!("gamma = {:.6}, |B|_H = {:.6}", g.gamma(), g.rkhs_constant());
        for p in [1.5, 2.0, 4.0, 8.0] {
            let s = g.sector_params(p)?;
            println!("  p = {p:<4} theta = {:.6} rad, cot = {:.6}", s.theta, s.c_theta);
        }
    }
    Ok(())
}
