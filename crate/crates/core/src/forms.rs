//! The Dirichlet form `ℰ(u,v) = −∫ [B D_H u, D_H v]_H dν∞`, its adjoint
//! `ℰ̃` (with `B^♯`), and the identities tying them to the generator.
//!
//! Every check evaluates both sides on one shared sample set, so algebraic
//! identities are exact up to round-off and only genuine integration
//! identities carry statistical slack.

use nalgebra::DVector;

use crate::calculus::{apply_adjoint_generator, apply_generator, CylinderFunction};
use crate::error::Result;
use crate::measure::{McEstimate, WeightedMeasure, WeightedSamples};
use crate::model::HGeometry;
use crate::report::CheckReport;
use crate::tolerance::Tolerances;

/// Value of a form with its Monte Carlo error.
pub type FormValue = McEstimate;

/// `u` values within this distance of 1 are dropped from the
/// Dirichlet-operator integrand.
pub const LEVEL_SET_EXCLUSION: f64 = 1e-12;

/// Form evaluator bound to a geometry, a measure and a sample set.
pub struct FormChecks<'a> {
    g: &'a HGeometry,
    w: &'a WeightedMeasure,
    samples: &'a WeightedSamples,
    tol: Tolerances,
}

impl<'a> FormChecks<'a> {
    pub fn new(g: &'a HGeometry, w: &'a WeightedMeasure, samples: &'a WeightedSamples, tol: Tolerances) -> Self {
        Self { g, w, samples, tol }
    }

    fn seed(&self) -> u64 {
        self.samples.seed
    }

    /// `[B D_H u, D_H v]_H = (BQ∇u)·∇v`, or with `B^♯`.
    fn bracket_at(&self, u: &CylinderFunction, v: &CylinderFunction, adjoint: bool, x: &DVector<f64>) -> f64 {
        let q = self.g.model().diffusion().as_matrix();
        let b = if adjoint { self.g.b_adj() } else { self.g.b() };
        (b * (q * u.gradient(x))).dot(&v.gradient(x))
    }

    /// `−[B D_H u, D_H v]_H e^{-U}` at each sample.
    pub fn form_values(&self, u: &CylinderFunction, v: &CylinderFunction, adjoint: bool) -> Result<Vec<f64>> {
        self.samples.weighted_values(|x| -self.bracket_at(u, v, adjoint, x))
    }

    pub fn form(&self, u: &CylinderFunction, v: &CylinderFunction, adjoint: bool) -> Result<FormValue> {
        Ok(McEstimate::from_values(&self.form_values(u, v, adjoint)?, self.seed()))
    }

    /// `|D_H u|²_H e^{-U}` at each sample.
    fn energy_values(&self, u: &CylinderFunction) -> Result<Vec<f64>> {
        let q = self.g.model().diffusion().as_matrix();
        self.samples.weighted_values(|x| {
            let gr = u.gradient(x);
            gr.dot(&(q * &gr))
        })
    }

    /// `−[BD_Hu, D_Hu]_H = ½|D_Hu|²_H` at every sample, and hence
    /// `ℰ(u,u) = ½‖D_Hu‖²` on the samples.
    pub fn coercivity(&self, u: &CylinderFunction) -> CheckReport {
        let name = format!("coercivity[{}]", u.name());
        let q = self.g.model().diffusion().as_matrix();
        let scale_b = 1.0 + self.g.rkhs_constant();
        let residuals = self.samples.map(|x, _| {
            let gr = u.gradient(x);
            let energy = gr.dot(&(q * &gr));
            let lhs = -self.bracket_at(u, u, false, x);
            let mag = scale_b * energy;
            if mag == 0.0 {
                lhs.abs()
            } else {
                (lhs - 0.5 * energy).abs() / mag
            }
        });
        let residuals = match residuals {
            Ok(r) => r,
            Err(e) => return CheckReport::errored(name, &e),
        };
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        let pointwise = CheckReport::at_most("pointwise_relative_residual", worst, self.tol.coercivity)
            .with_samples(self.samples.len(), self.seed());
        let integral = match (self.form(u, u, false), self.energy_values(u)) {
            (Ok(lhs), Ok(en)) => {
                let half = 0.5 * McEstimate::from_values(&en, self.seed()).mean;
                let rel = (lhs.mean - half).abs() / half.abs().max(f64::MIN_POSITIVE);
                let stat = if half == 0.0 { lhs.mean.abs() } else { rel };
                CheckReport::at_most("integral_relative_residual", stat, self.tol.coercivity)
                    .metric("form", lhs.mean)
                    .metric("half_energy", half)
            }
            (Err(e), _) | (_, Err(e)) => CheckReport::errored("integral_relative_residual", &e),
        };
        CheckReport::all(name, vec![pointwise, integral])
    }

    /// `|ℰ(u,v)| ≤ ‖B‖ ‖D_Hu‖_{L²(ν)} ‖D_Hv‖_{L²(ν)}`; the margin's standard
    /// error comes from the linearized per-sample statistic.
    pub fn sector_condition(&self, u: &CylinderFunction, v: &CylinderFunction) -> CheckReport {
        let name = format!("sector_condition[{},{}]", u.name(), v.name());
        let (e, a, b) = match (
            self.form_values(u, v, false),
            self.energy_values(u),
            self.energy_values(v),
        ) {
            (Ok(e), Ok(a), Ok(b)) => (e, a, b),
            (Err(err), _, _) | (_, Err(err), _) | (_, _, Err(err)) => return CheckReport::errored(name, &err),
        };
        let c = self.g.rkhs_constant();
        let seed = self.seed();
        let em = McEstimate::from_values(&e, seed);
        let nu = McEstimate::from_values(&a, seed).mean;
        let nv = McEstimate::from_values(&b, seed).mean;
        let root = (nu * nv).sqrt();
        let bound = c * root;
        let margin = bound - em.mean.abs();
        let se = if root > 0.0 {
            let sg = em.mean.signum();
            let lin: Vec<f64> = (0..e.len())
                .map(|s| c * (nv * a[s] + nu * b[s]) / (2.0 * root) - sg * e[s])
                .collect();
            McEstimate::from_values(&lin, seed).std_error
        } else {
            em.std_error
        };
        let scale = bound.max(em.mean.abs());
        CheckReport::at_least(name, margin, -self.tol.sigma * se - 1e-12 * scale)
            .with_std_error(se)
            .with_samples(e.len(), seed)
            .metric("form", em.mean)
            .metric("bound", bound)
            .metric("b_norm", c)
            .metric("ratio", if bound > 0.0 { em.mean.abs() / bound } else { 0.0 })
    }

    /// `ℰ(u,v) = −∫ (Lu) v dν`; with `adjoint` also `ℰ̃(u,v) = −∫ (L̃u) v dν`
    /// and `∫ (L̃u) v dν = ∫ u (Lv) dν`.
    pub fn generator_duality(&self, u: &CylinderFunction, v: &CylinderFunction, adjoint: bool) -> CheckReport {
        let name = format!("generator_duality[{},{}]", u.name(), v.name());
        let g = self.g;
        let weight = self.w.weight();
        let seed = self.seed();
        let one = |label: &str, vals: Result<Vec<f64>>, scale_vals: Result<Vec<f64>>| match (vals, scale_vals) {
            (Ok(d), Ok(s)) => {
                let est = McEstimate::from_values(&d, seed);
                let scale = McEstimate::from_values(&s, seed).mean.abs().max(1.0);
                CheckReport::within_sigma(label, &est, self.tol.sigma, scale)
            }
            (Err(e), _) | (_, Err(e)) => CheckReport::errored(label, &e),
        };
        let mut children = vec![one(
            "form_vs_generator",
            self.samples
                .weighted_values(|x| -self.bracket_at(u, v, false, x) + apply_generator(g, weight, u, x) * v.value(x)),
            self.form_values(u, v, false),
        )];
        if adjoint {
            children.push(one(
                "adjoint_form_vs_adjoint_generator",
                self.samples.weighted_values(|x| {
                    -self.bracket_at(u, v, true, x) + apply_adjoint_generator(g, weight, u, x) * v.value(x)
                }),
                self.form_values(u, v, true),
            ));
            children.push(one(
                "adjoint_duality",
                self.samples.weighted_values(|x| {
                    apply_adjoint_generator(g, weight, u, x) * v.value(x)
                        - u.value(x) * apply_generator(g, weight, v, x)
                }),
                self.samples
                    .weighted_values(|x| apply_generator(g, weight, v, x) * u.value(x)),
            ));
        }
        CheckReport::all(name, children)
    }

    /// `∫ (Lu)(u−1)⁺ dν ≤ 0`, evaluated on the form side as
    /// `∫_{u>1} [B D_H u, D_H u]_H dν`.
    pub fn dirichlet_operator(&self, u: &CylinderFunction) -> CheckReport {
        let name = format!("dirichlet_operator[{}]", u.name());
        let g = self.g;
        let weight = self.w.weight();
        let above = |x: &DVector<f64>| {
            let val = u.value(x);
            val > 1.0 && (val - 1.0).abs() >= LEVEL_SET_EXCLUSION
        };
        let form_side = self
            .samples
            .weighted_values(|x| if above(x) { self.bracket_at(u, u, false, x) } else { 0.0 });
        let gen_side = self.samples.weighted_values(|x| {
            if above(x) {
                apply_generator(g, weight, u, x) * (u.value(x) - 1.0)
            } else {
                0.0
            }
        });
        let (fs, gs) = match (form_side, gen_side) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return CheckReport::errored(name, &e),
        };
        let est = McEstimate::from_values(&fs, self.seed());
        let gen = McEstimate::from_values(&gs, self.seed());
        let hits = fs.iter().filter(|v| **v != 0.0).count();
        CheckReport::at_most(name, est.mean, self.tol.sigma * est.std_error)
            .with_std_error(est.std_error)
            .with_samples(fs.len(), self.seed())
            .metric("fraction_above_one", hits as f64 / fs.len() as f64)
            .metric("generator_side", gen.mean)
            .metric("generator_side_se", gen.std_error)
    }

    /// `ℰ(u,v) + ℰ̃(u,v) = ∫ [D_Hu, D_Hv]_H dν`, pointwise on the samples.
    pub fn symmetric_part(&self, u: &CylinderFunction, v: &CylinderFunction) -> CheckReport {
        let name = format!("symmetric_part[{},{}]", u.name(), v.name());
        let q = self.g.model().diffusion().as_matrix();
        let scale_b = 1.0 + self.g.rkhs_constant();
        let res = self.samples.map(|x, _| {
            let (gu, gv) = (u.gradient(x), v.gradient(x));
            let qu = q * &gu;
            let lhs = -(self.g.b() * &qu).dot(&gv) - (self.g.b_adj() * &qu).dot(&gv);
            let rhs = qu.dot(&gv);
            let mag = scale_b * qu.dot(&gu).sqrt() * gv.dot(&(q * &gv)).sqrt();
            if mag == 0.0 {
                (lhs - rhs).abs()
            } else {
                (lhs - rhs).abs() / mag
            }
        });
        match res {
            Ok(r) => {
                let worst = r.iter().cloned().fold(0.0, f64::max);
                CheckReport::at_most(name, worst, self.tol.drift_algebra).with_samples(r.len(), self.seed())
            }
            Err(e) => CheckReport::errored(name, &e),
        }
    }
}

fn with_checks<T>(
    g: &HGeometry,
    w: &WeightedMeasure,
    n: usize,
    seed: u64,
    name: &str,
    run: impl FnOnce(&FormChecks<'_>) -> T,
    on_err: impl FnOnce(CheckReport) -> T,
) -> T {
    match w.sample(n, seed) {
        Ok(s) => run(&FormChecks::new(g, w, &s, Tolerances::default())),
        Err(e) => on_err(CheckReport::errored(name, &e)),
    }
}

/// `ℰ(u,v)` (or `ℰ̃(u,v)` when `adjoint`) on `n` fresh samples.
pub fn dirichlet_form(
    g: &HGeometry,
    w: &WeightedMeasure,
    u: &CylinderFunction,
    v: &CylinderFunction,
    adjoint: bool,
    n: usize,
    seed: u64,
) -> Result<FormValue> {
    FormChecks::new(g, w, &w.sample(n, seed)?, Tolerances::default()).form(u, v, adjoint)
}

pub fn check_coercivity(g: &HGeometry, w: &WeightedMeasure, u: &CylinderFunction, n: usize, seed: u64) -> CheckReport {
    with_checks(g, w, n, seed, "coercivity", |c| c.coercivity(u), |r| r)
}

pub fn check_sector_condition(
    g: &HGeometry,
    w: &WeightedMeasure,
    u: &CylinderFunction,
    v: &CylinderFunction,
    n: usize,
    seed: u64,
) -> CheckReport {
    with_checks(g, w, n, seed, "sector_condition", |c| c.sector_condition(u, v), |r| r)
}

pub fn check_generator_duality(
    g: &HGeometry,
    w: &WeightedMeasure,
    u: &CylinderFunction,
    v: &CylinderFunction,
    adjoint: bool,
    n: usize,
    seed: u64,
) -> CheckReport {
    with_checks(
        g,
        w,
        n,
        seed,
        "generator_duality",
        |c| c.generator_duality(u, v, adjoint),
        |r| r,
    )
}

pub fn check_dirichlet_operator(
    g: &HGeometry,
    w: &WeightedMeasure,
    u: &CylinderFunction,
    n: usize,
    seed: u64,
) -> CheckReport {
    with_checks(g, w, n, seed, "dirichlet_operator", |c| c.dirichlet_operator(u), |r| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::WeightFunction;
    use crate::model::OuModel;
    use nalgebra::{dmatrix, dvector};

    fn setup(weight: WeightFunction) -> (HGeometry, WeightedMeasure) {
        let model = OuModel::nonnormal().unwrap();
        let g = HGeometry::new(model.clone()).unwrap();
        (g, WeightedMeasure::new(model, weight).unwrap())
    }

    #[test]
    fn linear_energy_is_half_gradient_norm() {
        let (g, w) = setup(WeightFunction::zero(3));
        let b = dvector![0.5, -1.0, 0.3];
        let u = CylinderFunction::linear(b.clone());
        let e = dirichlet_form(&g, &w, &u, &u, false, 1000, 1).unwrap();
        let want = 0.5 * b.dot(&(g.model().diffusion().as_matrix() * &b));
        assert!((e.mean - want).abs() < 1e-13);
        assert!(e.std_error < 1e-14);
        let c = CylinderFunction::constant(3, 2.0);
        let z = dirichlet_form(&g, &w, &c, &u, false, 1000, 1).unwrap();
        assert_eq!(z.mean, 0.0);
    }

    #[test]
    fn form_transpose_identity_is_exact_on_samples() {
        let (g, w) = setup(WeightFunction::log_cosh(dvector![0.3, 0.2, -0.5]));
        let s = w.sample(5000, 2).unwrap();
        let fc = FormChecks::new(&g, &w, &s, Tolerances::default());
        let u = CylinderFunction::cos_linear(dvector![1.0, 0.0, 0.5], 0.2);
        let v = CylinderFunction::quadratic(dmatrix![1.0, 0.0, 0.2; 0.0, 0.5, 0.0; 0.2, 0.0, 1.0]);
        let a = fc.form(&u, &v, false).unwrap().mean;
        let b = fc.form(&v, &u, true).unwrap().mean;
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        assert!(fc.symmetric_part(&u, &v).passed);
        assert!(fc.coercivity(&u).passed);
    }

    #[test]
    fn duality_and_dirichlet_checks_pass() {
        let (g, w) = setup(WeightFunction::quadratic(dmatrix![0.3, 0.0, 0.0; 0.0, 0.2, 0.1; 0.0, 0.1, 0.4]).unwrap());
        let s = w.sample(100_000, 3).unwrap();
        let fc = FormChecks::new(&g, &w, &s, Tolerances::default());
        let u = CylinderFunction::quadratic(dmatrix![1.0, 0.2, 0.0; 0.2, 0.7, 0.0; 0.0, 0.0, 1.5]);
        let v = CylinderFunction::sin_linear(dvector![0.4, -0.3, 0.8], 0.5);
        let r = fc.generator_duality(&u, &v, true);
        assert!(r.passed, "{r:#?}");
        let t = CylinderFunction::tanh_linear(dvector![1.0, 0.5, -0.5]).scaled(2.0);
        let d = fc.dirichlet_operator(&t);
        assert!(d.passed && d.statistic < 0.0, "{d:#?}");
        let below = CylinderFunction::sin_linear(dvector![1.0, 0.0, 0.0], 0.0).shifted(-2.0);
        assert_eq!(fc.dirichlet_operator(&below).statistic, 0.0);
        assert!(fc.sector_condition(&u, &v).passed);
        let r = fc.sector_condition(&u, &u);
        assert!((r.metrics["ratio"] - 0.5 / g.rkhs_constant()).abs() < 1e-9);
    }
}
