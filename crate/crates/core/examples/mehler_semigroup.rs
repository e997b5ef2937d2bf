//! The transition semigroup through the Mehler formula: a closed-form
//! comparison for `cos⟨b, x⟩` and the positivity, sub-Markov, invariance
//! and contraction checks.

use nalgebra::dvector;
use ou_sector::calculus::{
    semigroup_properties_check, MehlerKernel, QuadratureSpec, SemigroupCheckConfig, SemigroupProbe,
};
use ou_sector::linalg::integrate_sandwich;
use ou_sector::model::OuModel;

fn main() -> ou_sector::Result<()> {
    let m = OuModel::nonnormal()?;
    let b = dvector![0.8, -0.3, 0.5];
    let x = dvector![0.2, 1.0, -0.4];
    for t in [0.1, 1.0, 5.0] {
        let k = MehlerKernel::new(&m, t, QuadratureSpec::GaussHermite { nodes: 16 })?;
        let got = k.apply(|y| y.dot(&b).cos(), &x).value;
        let e = ou_sector::linalg::matrix_exp(m.drift().as_matrix(), t)?;
        let qt = integrate_sandwich(m.drift(), m.diffusion(), t)?;
        let want = (e * &x).dot(&b).cos() * (-0.5 * b.dot(&(qt.as_matrix() * &b))).exp();
        println!("t = {t}: P_t f(x) = {got:.12}, closed form {want:.12}");
    }
    let probes = vec![SemigroupProbe::clamp_linear(b.clone())];
    let r = semigroup_properties_check(&m, &[0.5, 2.0], &probes, &SemigroupCheckConfig::default());
    for (path, c) in r.walk().into_iter().filter(|(_, c)| c.children.is_empty()) {
        println!("{} {path}", if c.passed { "ok  " } else { "FAIL" });
    }
    Ok(())
}
