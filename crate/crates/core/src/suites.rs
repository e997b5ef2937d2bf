//! Named verification suites shared by the command-line runner and the
//! spectral-truncation pipeline.
//!
//! Statistical suites are re-run once with a fresh seed when they fail; the
//! report then carries the second verdict and a note naming the failures
//! of the first attempt.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    apply_generator, semigroup_properties_check, ComplexFunction, CylinderFunction, FunctionSampler, MehlerKernel,
    ProbeBounds, QuadratureSpec, SemigroupCheckConfig, SemigroupProbe,
};
use crate::forms::{FormChecks, LEVEL_SET_EXCLUSION};
use crate::linalg::quadrature::sandwich_by_quadrature;
use crate::linalg::{integrate_sandwich, is_psd, max_abs, spd_sqrt};
use crate::measure::{check_ibp_on, WeightFunction, WeightedMeasure};
use crate::model::{gaussian_vector, HGeometry, OuModel};
use crate::report::CheckReport;
use crate::sector::{
    assemble_galerkin, field_of_values, numerical_range_profile, pointwise_identities, Assembly, FovReport,
    GalerkinOptions, Moments, DEFAULT_FOV_ANGLES,
};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    DriftAlgebra,
    Lyapunov,
    SectorAngle,
    Identities,
    NumericalRange,
    Forms,
    Ibp,
    Mehler,
    Galerkin,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::DriftAlgebra,
        Suite::Lyapunov,
        Suite::SectorAngle,
        Suite::Identities,
        Suite::NumericalRange,
        Suite::Forms,
        Suite::Ibp,
        Suite::Mehler,
        Suite::Galerkin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DriftAlgebra => "drift_algebra",
            Suite::Lyapunov => "lyapunov",
            Suite::SectorAngle => "sector_angle",
            Suite::Identities => "identities",
            Suite::NumericalRange => "numerical_range",
            Suite::Forms => "forms",
            Suite::Ibp => "ibp",
            Suite::Mehler => "mehler",
            Suite::Galerkin => "galerkin",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSettings {
    pub ps: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Random test functions per statistical suite.
    pub functions: usize,
    /// Random `(f, x, p)` draws for the pointwise identities.
    pub pointwise_draws: usize,
    pub tol: Tolerances,
    pub retry: bool,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self {
            ps: vec![1.5, 2.0, 4.0, 8.0],
            samples: 100_000,
            seed: 0,
            functions: 20,
            pointwise_draws: 1000,
            tol: Tolerances::default(),
            retry: true,
        }
    }
}

/// Seed for one consumer of a run seed.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    // FNV-1a of the label, mixed with splitmix64
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = base ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn with_retry(s: &SuiteSettings, label: &str, run: impl Fn(u64) -> CheckReport) -> CheckReport {
    let first = run(derive_seed(s.seed, label));
    if first.passed || !s.retry {
        return first;
    }
    let failed = first.failures().join(", ");
    run(derive_seed(s.seed, &format!("{label}/retry")))
        .note(format!("first attempt failed ({failed}); re-run with a fresh seed"))
}

pub fn drift_algebra_suite(g: &HGeometry, s: &SuiteSettings) -> CheckReport {
    let seed = derive_seed(s.seed, "drift");
    let mut r = g.check_drift_algebra(10, seed, s.tol.drift_algebra);
    r.children.push(g.check_rkhs_bound(100, seed ^ 1));
    r.children.push(CheckReport::at_most(
        "v_adjoint_is_identity",
        g.domv_residual(),
        s.tol.drift_algebra,
    ));
    CheckReport::all("drift_algebra", r.children)
        .metric("gamma", g.gamma())
        .metric("b_norm", g.rkhs_constant())
}

/// `Q∞` from the Lyapunov solver against `Q_T` at `T = 50/gap`, computed
/// both by block exponentials and by Gauss–Legendre quadrature.
pub fn lyapunov_suite(m: &OuModel, s: &SuiteSettings) -> CheckReport {
    let qi = m.q_inf().as_matrix();
    let scale = max_abs(qi);
    let qn = max_abs(m.diffusion().as_matrix());
    let t = 50.0 / m.drift().gap();
    let mut children = vec![CheckReport::at_most("residual", m.lyapunov_residual() / qn, 1e-10)];
    match integrate_sandwich(m.drift(), m.diffusion(), t) {
        Ok(qt) => {
            let d = max_abs(&(qt.as_matrix() - qi)) / scale;
            children.push(CheckReport::at_most("vs_block_exponential", d, s.tol.lyapunov_oracle).metric("t", t));
            if let Ok(half) = integrate_sandwich(m.drift(), m.diffusion(), 0.5 * t) {
                let tol = 1e-12 * scale;
                let ok = is_psd(&(qt.as_matrix() - half.as_matrix()), tol) && is_psd(&(qi - qt.as_matrix()), tol);
                children.push(CheckReport::at_most("monotone_in_t", if ok { 0.0 } else { 1.0 }, 0.0));
            }
        }
        Err(e) => children.push(CheckReport::errored("vs_block_exponential", &e)),
    }
    match sandwich_by_quadrature(m.drift().as_matrix(), m.diffusion().as_matrix(), t, 32) {
        Ok(qt) => {
            let d = max_abs(&(qt - qi)) / scale;
            children.push(CheckReport::at_most("vs_quadrature", d, s.tol.lyapunov_oracle).metric("t", t));
        }
        Err(e) => children.push(CheckReport::errored("vs_quadrature", &e)),
    }
    CheckReport::all("lyapunov", children)
}

/// `cot θ_p`, the chain `pγ/2 ≤ C_θ√(p−1)` and
/// `‖B + I/p‖² = γ²/4 + (½ − 1/p)²` for every exponent.
pub fn sector_angle_suite(g: &HGeometry, s: &SuiteSettings) -> CheckReport {
    let gamma = g.gamma();
    let n = g.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let half = g.op_norm_h(&(g.b() + &id * 0.5));
    let mut children = vec![CheckReport::at_most(
        "half_shift_norm",
        (half - 0.5 * gamma).abs(),
        1e-10 * (1.0 + gamma),
    )];
    for &p in &s.ps {
        let name = format!("p={p}");
        let sp = match g.sector_params(p) {
            Ok(sp) => sp,
            Err(e) => {
                children.push(CheckReport::errored(name, &e));
                continue;
            }
        };
        let formula = ((p - 2.0).powi(2) + p * p * gamma * gamma).sqrt() / (2.0 * (p - 1.0).sqrt());
        let cot = if sp.theta == std::f64::consts::FRAC_PI_2 {
            0.0
        } else {
            1.0 / sp.theta.tan()
        };
        let shifted = g.op_norm_h(&(g.b() + &id * (1.0 / p))).powi(2);
        let want = 0.25 * gamma * gamma + (0.5 - 1.0 / p).powi(2);
        children.push(
            CheckReport::all(
                name,
                vec![
                    CheckReport::at_most("cot_theta", (cot - formula).abs(), 1e-12 * (1.0 + formula)),
                    CheckReport::at_most(
                        "theta_in_range",
                        if sp.theta > 0.0 && sp.theta <= std::f64::consts::FRAC_PI_2 {
                            0.0
                        } else {
                            1.0
                        },
                        0.0,
                    ),
                    CheckReport::at_least("chain", sp.c_theta * (p - 1.0).sqrt() - 0.5 * p * gamma, -1e-12),
                    CheckReport::at_most("shifted_norm_identity", (shifted - want).abs(), 1e-10 * (1.0 + want)),
                ],
            )
            .metric("theta", sp.theta)
            .metric("c_theta", sp.c_theta),
        );
    }
    CheckReport::all("sector_angle", children).metric("gamma", gamma)
}

/// Random `(f, x, p)` draws with `p ≥ 2`: exact identities, no sampling error.
pub fn identities_suite(g: &HGeometry, s: &SuiteSettings) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(s.seed, "identities"));
    let sampler = FunctionSampler::new(g.model());
    let root = spd_sqrt(g.model().q_inf()).into_inner();
    let mut ps: Vec<f64> = s.ps.iter().cloned().filter(|&p| p >= 2.0).collect();
    if ps.is_empty() {
        ps = vec![2.0, 4.0];
    }
    let (mut re, mut im, mut half, mut chain) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for k in 0..s.pointwise_draws {
        let f: ComplexFunction = if k % 2 == 0 {
            sampler.random_complex(&mut rng)
        } else {
            sampler.random_complex_quadratic(&mut rng)
        };
        let x = &root * gaussian_vector(g.dim(), &mut rng);
        // listed exponents in turn, every third draw a random one in [2, 10]
        let p = if k % 3 == 2 {
            rng.random_range(2.0..10.0)
        } else {
            ps[k % ps.len()]
        };
        match pointwise_identities(g, &f, p, &x) {
            Ok(Some(r)) => {
                evaluated += 1;
                re = re.max(r.re_residual);
                im = im.max(r.im_residual);
                half = half.max(r.im_residual_half_shift);
                chain = chain.min(r.chain_margin);
            }
            Ok(None) => skipped += 1,
            Err(e) => return CheckReport::errored("identities", &e),
        }
    }
    let tol = s.tol.pointwise_identity;
    CheckReport::all(
        "identities",
        vec![
            CheckReport::at_most("real_part", re, tol),
            CheckReport::at_most("imaginary_part", im, tol),
            CheckReport::at_least("sector_chain", if chain.is_finite() { chain } else { 0.0 }, -tol),
        ],
    )
    .metric("draws", evaluated as f64)
    .metric("skipped_zeros", skipped as f64)
    .metric("half_shift_variant_max_residual", half)
}

/// Numerical-range margins for random complex functions at every exponent.
pub fn numerical_range_suite(g: &HGeometry, w: &WeightedMeasure, s: &SuiteSettings) -> CheckReport {
    with_retry(s, "range", |seed| {
        let samples = match w.sample(s.samples, seed) {
            Ok(x) => x,
            Err(e) => return CheckReport::errored("numerical_range", &e),
        };
        let sampler = FunctionSampler::new(g.model());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
        let mut per_p: Vec<Vec<crate::sector::RangeSample>> = vec![Vec::new(); s.ps.len()];
        for _ in 0..s.functions {
            let f = sampler.random_complex(&mut rng);
            match numerical_range_profile(g, &samples, &f, &s.ps, &s.tol) {
                Ok(rs) => rs.into_iter().enumerate().for_each(|(i, r)| per_p[i].push(r)),
                Err(e) => return CheckReport::errored("numerical_range", &e),
            }
        }
        let children =
            s.ps.iter()
                .zip(&per_p)
                .map(|(&p, rs)| {
                    let failing = rs.iter().filter(|r| !r.passed).count();
                    let worst = rs
                        .iter()
                        .map(|r| (r.margin - r.threshold) / r.std_error.max(1e-300))
                        .fold(f64::INFINITY, f64::min);
                    let ratio = rs
                        .iter()
                        .filter(|r| r.re < 0.0)
                        .map(|r| r.im.abs() / -r.re)
                        .fold(0.0, f64::max);
                    CheckReport::at_most(format!("p={p}"), failing as f64, 0.0)
                        .with_samples(s.samples, seed)
                        .metric("functions", rs.len() as f64)
                        .metric("c_theta", rs.first().map_or(0.0, |r| r.c_theta))
                        .metric("max_im_over_minus_re", ratio)
                        .metric("min_margin_in_std_errors", if worst.is_finite() { worst } else { 0.0 })
                        .metric("excluded_samples", rs.iter().map(|r| r.excluded).sum::<usize>() as f64)
                })
                .collect();
        CheckReport::all("numerical_range", children)
    })
}

fn dirichlet_probes(sampler: &FunctionSampler, rng: &mut ChaCha8Rng) -> Vec<CylinderFunction> {
    let b = sampler.direction(1.0, rng);
    vec![
        CylinderFunction::tanh_linear(b.clone()).scaled(2.0).renamed("2tanh"),
        CylinderFunction::linear(sampler.direction(1.0, rng)),
        CylinderFunction::sin_linear(b, 0.0).shifted(-2.0).renamed("sin-2"),
    ]
}

/// Coercivity, symmetric part, generator duality, sector condition and the
/// Dirichlet-operator inequality on one sample set.
pub fn forms_suite(g: &HGeometry, w: &WeightedMeasure, s: &SuiteSettings) -> CheckReport {
    with_retry(s, "forms", |seed| {
        let samples = match w.sample(s.samples, seed) {
            Ok(x) => x,
            Err(e) => return CheckReport::errored("forms", &e),
        };
        let fc = FormChecks::new(g, w, &samples, s.tol);
        let sampler = FunctionSampler::new(g.model());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf0);
        let family = sampler.builtin_family(&mut rng);
        let coercive = family.iter().map(|u| fc.coercivity(u)).collect();
        let mut symmetric = Vec::new();
        let mut duality = Vec::new();
        let mut sector = Vec::new();
        for (i, u) in family.iter().enumerate() {
            for (j, v) in family.iter().enumerate() {
                duality.push(fc.generator_duality(u, v, true));
                if i <= j {
                    symmetric.push(fc.symmetric_part(u, v));
                    sector.push(fc.sector_condition(u, v));
                }
            }
        }
        let dirichlet = dirichlet_probes(&sampler, &mut rng)
            .iter()
            .map(|u| fc.dirichlet_operator(u))
            .collect();
        CheckReport::all(
            "forms",
            vec![
                CheckReport::all("coercivity", coercive),
                CheckReport::all("symmetric_part", symmetric),
                CheckReport::all("generator_duality", duality),
                CheckReport::all("sector_condition", sector),
                CheckReport::all("dirichlet_operator", dirichlet),
            ],
        )
        .with_samples(s.samples, seed)
        .metric("level_set_exclusion", LEVEL_SET_EXCLUSION)
    })
}

/// Integration by parts for `functions` random `(f, h)` pairs; the
/// directions cycle through `Qx*`, `BQx*` and generic `H` vectors.
pub fn ibp_suite(g: &HGeometry, w: &WeightedMeasure, s: &SuiteSettings) -> CheckReport {
    with_retry(s, "ibp", |seed| {
        let samples = match w.sample(s.samples, seed) {
            Ok(x) => x,
            Err(e) => return CheckReport::errored("ibp", &e),
        };
        let sampler = FunctionSampler::new(g.model());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1b);
        let q = g.model().diffusion().as_matrix();
        let q_half = spd_sqrt(g.model().diffusion()).into_inner();
        let children = (0..s.functions)
            .map(|k| {
                let f = if k == 0 {
                    CylinderFunction::constant(g.dim(), 1.0)
                } else {
                    sampler.random_real(&mut rng)
                };
                let xs = sampler.direction(1.0, &mut rng);
                let (kind, h) = match k % 3 {
                    0 => ("q", q * &xs),
                    1 => ("bq", g.b() * (q * &xs)),
                    _ => ("h", &q_half * gaussian_vector(g.dim(), &mut rng)),
                };
                let mut r = check_ibp_on(g, w, &samples, &f, &h, &s.tol);
                r.name = format!("{k}:{kind}:{}", f.name());
                r
            })
            .collect();
        CheckReport::all("ibp", children).with_samples(s.samples, seed)
    })
}

/// Semigroup properties, Chapman–Kolmogorov and the generator as the time
/// derivative, all for the unweighted model.
pub fn mehler_suite(m: &OuModel, s: &SuiteSettings) -> CheckReport {
    with_retry(s, "mehler", |seed| {
        let dim = m.dim();
        let sampler = FunctionSampler::new(m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3e);
        let b = sampler.direction(1.0, &mut rng);
        let c = sampler.quadratic_matrix(&mut rng);
        let b2 = b.clone();
        let probes = vec![
            SemigroupProbe::clamp_linear(b.clone()),
            SemigroupProbe::new("half(1+cos)", ProbeBounds::UnitInterval, move |x| {
                0.5 * (1.0 + x.dot(&b2).cos())
            }),
            SemigroupProbe::from_function(CylinderFunction::cos_linear(b.clone(), 0.0), ProbeBounds::Unbounded),
            SemigroupProbe::quadratic_form(c.clone(), m),
        ];
        let (quadrature, outer) = match dim {
            1 | 2 => (QuadratureSpec::GaussHermite { nodes: 12 }, 20_000),
            3 => (QuadratureSpec::GaussHermite { nodes: 8 }, 10_000),
            4 => (QuadratureSpec::GaussHermite { nodes: 5 }, 5_000),
            _ => (
                QuadratureSpec::MonteCarlo {
                    samples: 20_000,
                    seed: seed ^ 7,
                },
                2_000,
            ),
        };
        let cfg = SemigroupCheckConfig {
            samples: outer.min(s.samples),
            points: 200,
            seed,
            sigma: s.tol.sigma,
            quadrature,
            p: 2.0,
        };
        let props = semigroup_properties_check(m, &[0.1, 0.5, 2.0], &probes, &cfg);
        let mut children = vec![props];
        children.push(chapman_kolmogorov(m, &b, seed));
        children.push(generator_derivative(m, &c, &b, seed));
        CheckReport::all("mehler", children)
    })
}

fn chapman_kolmogorov(m: &OuModel, b: &DVector<f64>, seed: u64) -> CheckReport {
    if m.dim() > 3 {
        return CheckReport::all("chapman_kolmogorov", vec![]).note("skipped above dimension 3");
    }
    let (lo, hi) = if m.dim() <= 2 { (10, 14) } else { (6, 9) };
    let f = CylinderFunction::cos_linear(b.clone(), 0.4);
    let (s, t) = (0.3, 0.6);
    let run = |nodes: usize| -> crate::Result<Vec<(f64, f64)>> {
        let q = QuadratureSpec::GaussHermite { nodes };
        let ks = MehlerKernel::new(m, s, q)?;
        let kt = MehlerKernel::new(m, t, q)?;
        let kst = MehlerKernel::new(m, s + t, q)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc4);
        let root = spd_sqrt(m.q_inf()).into_inner();
        Ok((0..5)
            .map(|_| {
                let x = &root * gaussian_vector(m.dim(), &mut rng);
                let direct = kst.apply(|y| f.value(y), &x).value;
                let nested = ks.apply(|y| kt.apply(|z| f.value(z), y).value, &x).value;
                (direct, nested)
            })
            .collect())
    };
    match (run(lo), run(hi)) {
        (Ok(a), Ok(bb)) => {
            let worst = a.iter().map(|(d, n)| (d - n).abs()).fold(0.0, f64::max);
            // quadrature error estimated from the finer rule
            let err = a
                .iter()
                .zip(&bb)
                .map(|((d1, n1), (d2, n2))| (d1 - d2).abs() + (n1 - n2).abs())
                .fold(0.0, f64::max);
            CheckReport::at_most("chapman_kolmogorov", worst, err.max(1e-13)).metric("quadrature_error", err)
        }
        (Err(e), _) | (_, Err(e)) => CheckReport::errored("chapman_kolmogorov", &e),
    }
}

/// Richardson-extrapolated `(P(h)f − f)/h` against `Lf` for a quadratic `f`.
fn generator_derivative(m: &OuModel, c: &DMatrix<f64>, b: &DVector<f64>, seed: u64) -> CheckReport {
    let g = match HGeometry::new(m.clone()) {
        Ok(g) => g,
        Err(e) => return CheckReport::errored("generator_derivative", &e),
    };
    let f = CylinderFunction::quadratic(c.clone()).sum(&CylinderFunction::linear(b.clone()));
    let u = WeightFunction::zero(m.dim());
    let h = 1e-3;
    let q = QuadratureSpec::GaussHermite { nodes: 2 };
    let (k1, k2) = match (MehlerKernel::new(m, h, q), MehlerKernel::new(m, 0.5 * h, q)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return CheckReport::errored("generator_derivative", &e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1);
    let root = spd_sqrt(m.q_inf()).into_inner();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x = &root * gaussian_vector(m.dim(), &mut rng);
        let f0 = f.value(&x);
        let d1 = (k1.apply(|y| f.value(y), &x).value - f0) / h;
        let d2 = (k2.apply(|y| f.value(y), &x).value - f0) / (0.5 * h);
        let rich = 2.0 * d2 - d1;
        let lf = apply_generator(&g, &u, &f, &x);
        worst = worst.max((rich - lf).abs() / lf.abs().max(1.0));
    }
    CheckReport::at_most("generator_derivative", worst, 1e-3).metric("h", h)
}

/// Result of the Galerkin suite: the report and one field of values per
/// exponent.
pub struct GalerkinOutcome {
    pub report: CheckReport,
    pub fields: Vec<(f64, FovReport)>,
}

/// Galerkin sections of the generator and containment of their field of
/// values in the sector of each exponent.
pub fn galerkin_suite(g: &HGeometry, w: &WeightedMeasure, s: &SuiteSettings) -> GalerkinOutcome {
    let degree = if g.dim() <= 3 { 2 } else { 1 };
    let seed = derive_seed(s.seed, "galerkin");
    // On Monte Carlo moments only the form side keeps the pointwise sector
    // bound, so containment is tested on that assembly.
    let mut opts = GalerkinOptions::new(degree, s.samples, seed);
    opts.assembly = if w.weight().is_zero() {
        Assembly::Generator
    } else {
        Assembly::Form
    };
    let mut sys = assemble_galerkin(g, w, &opts);
    if let Ok(x) = &sys {
        if opts.assembly == Assembly::Generator && matches!(x.moments, Moments::MonteCarlo { .. }) {
            opts.assembly = Assembly::Form;
            sys = assemble_galerkin(g, w, &opts);
        }
    }
    let sys = match sys {
        Ok(x) => x,
        Err(e) => {
            return GalerkinOutcome {
                report: CheckReport::errored("galerkin", &e),
                fields: vec![],
            }
        }
    };
    let exact = matches!(sys.moments, Moments::Exact { .. });
    let mut children = Vec::new();
    let mut fields = Vec::new();
    for &p in &s.ps {
        let sp = match g.sector_params(p) {
            Ok(x) => x,
            Err(e) => {
                children.push(CheckReport::errored(format!("fov p={p}"), &e));
                continue;
            }
        };
        match field_of_values(&sys.m, &sys.gram, DEFAULT_FOV_ANGLES, &sp) {
            Ok(fov) => {
                children.push(
                    CheckReport::at_most(format!("fov p={p}"), fov.support_margin, fov.tolerance)
                        .metric("theta", fov.theta)
                        .metric("max_abs_im", fov.max_abs_im),
                );
                fields.push((p, fov));
            }
            Err(e) => children.push(CheckReport::errored(format!("fov p={p}"), &e)),
        }
    }
    if exact {
        if g.gamma() < 1e-12 {
            let max_im = fields.first().map_or(0.0, |(_, f)| f.max_abs_im);
            children.push(CheckReport::at_most("real_axis", max_im, s.tol.spectrum));
        }
        let mut other = opts;
        other.assembly = Assembly::Form;
        match assemble_galerkin(g, w, &other) {
            Ok(form) => children.push(CheckReport::at_most(
                "assemblies_agree",
                max_abs(&(&form.m - &sys.m)) / max_abs(&sys.m).max(1.0),
                s.tol.spectrum,
            )),
            Err(e) => children.push(CheckReport::errored("assemblies_agree", &e)),
        }
        let mut lin = opts;
        lin.degree = 1;
        match assemble_galerkin(g, w, &lin).and_then(|x| x.spectrum()) {
            Ok(spec) => {
                let mut want = crate::linalg::eigenvalues(g.model().drift().as_matrix());
                want.push(nalgebra::Complex::new(0.0, 0.0));
                let worst = spec
                    .iter()
                    .map(|z| want.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                children.push(CheckReport::at_most("linear_section_spectrum", worst, s.tol.spectrum));
            }
            Err(e) => children.push(CheckReport::errored("linear_section_spectrum", &e)),
        }
    }
    let moments = match sys.moments {
        Moments::Exact { .. } => "exact",
        Moments::MonteCarlo { .. } => "monte_carlo",
    };
    let report = CheckReport::all("galerkin", children)
        .metric("degree", degree as f64)
        .metric("basis_size", sys.len() as f64)
        .note(format!("moments: {moments}"));
    GalerkinOutcome { report, fields }
}

/// Runs the selected suites in dependency order.
pub fn run_suites(
    g: &HGeometry,
    w: &WeightedMeasure,
    suites: &[Suite],
    s: &SuiteSettings,
) -> (Vec<CheckReport>, Vec<(f64, FovReport)>) {
    let mut sorted = suites.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut reports = Vec::new();
    let mut fields = Vec::new();
    for suite in sorted {
        let r = match suite {
            Suite::DriftAlgebra => drift_algebra_suite(g, s),
            Suite::Lyapunov => lyapunov_suite(g.model(), s),
            Suite::SectorAngle => sector_angle_suite(g, s),
            Suite::Identities => identities_suite(g, s),
            Suite::NumericalRange => numerical_range_suite(g, w, s),
            Suite::Forms => forms_suite(g, w, s),
            Suite::Ibp => ibp_suite(g, w, s),
            Suite::Mehler => mehler_suite(g.model(), s),
            Suite::Galerkin => {
                let out = galerkin_suite(g, w, s);
                fields = out.fields;
                out.report
            }
        };
        reports.push(r);
    }
    (reports, fields)
}
