//! Property tests for the algebraic invariants of the model, the weighted
//! measure, the forms and the sector constants.

mod common;

use nalgebra::{Complex, DMatrix, DVector};
use ou_sector::calculus::{apply_generator, CylinderFunction, FunctionSampler};
use ou_sector::forms::FormChecks;
use ou_sector::linalg::{integrate_sandwich, is_psd, matrix_exp};
use ou_sector::measure::{check_ibp, integrate_nu, WeightFunction, WeightedMeasure};
use ou_sector::model::{sector_params, HGeometry, OuModel};
use ou_sector::sector::{dual_gradient, dual_value};
use ou_sector::Tolerances;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn model(seed: u64, n: usize) -> OuModel {
    OuModel::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponential_of_dissipative_matrix_contracts(seed in any::<u64>(), n in 1usize..7, t in 0.0f64..20.0) {
        let m = model(seed, n);
        // the random drift is −S + K with S positive definite
        let a = m.drift().as_matrix();
        prop_assume!(is_psd(&-(a + a.transpose()), 0.0));
        let e = matrix_exp(a, t).unwrap();
        prop_assert!(e.singular_values().max() <= 1.0 + 1e-12);
    }

    #[test]
    fn sandwich_is_monotone_in_time(seed in any::<u64>(), n in 1usize..6, t in 0.05f64..5.0) {
        let m = model(seed, n);
        let a = integrate_sandwich(m.drift(), m.diffusion(), t).unwrap();
        let b = integrate_sandwich(m.drift(), m.diffusion(), 1.5 * t).unwrap();
        let scale = b.as_matrix().amax();
        prop_assert!(is_psd(&(b.as_matrix() - a.as_matrix()), 1e-12 * scale));
        prop_assert!(is_psd(&(m.q_inf().as_matrix() - b.as_matrix()), 1e-12 * scale));
    }

    #[test]
    fn drift_operator_and_its_adjoint_sum_to_minus_identity(seed in any::<u64>(), n in 1usize..9) {
        let m = model(seed, n);
        let b = drift_b(&m);
        let sum = &b + h_adjoint(&m, &b) + DMatrix::identity(n, n);
        prop_assert!(h_op_norm(&m, &sum) <= 1e-9);
        let g = HGeometry::new(m.clone()).unwrap();
        prop_assert!((g.b() - &b).amax() <= 1e-10 * b.amax().max(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let h = sqrt_spd(m.diffusion().as_matrix()) * normal_vector(n, &mut rng);
        prop_assert!((g.bracket(&(&b * &h), &h) + 0.5 * g.h_norm_sq(&h)).abs() <= 1e-9 * g.h_norm_sq(&h));
    }

    #[test]
    fn half_shifted_drift_has_norm_half_gamma(seed in any::<u64>(), n in 1usize..9) {
        let m = model(seed, n);
        let g = HGeometry::new(m.clone()).unwrap();
        let shifted = g.b() + DMatrix::identity(n, n) * 0.5;
        prop_assert!((h_op_norm(&m, &shifted) - 0.5 * g.gamma()).abs() <= 1e-10 * (1.0 + g.gamma()));
    }

    #[test]
    fn sector_angle_is_widest_at_two(gamma in 0.01f64..5.0) {
        let grid: Vec<f64> = (0..=89).map(|i| 1.1 + 0.1 * i as f64).collect();
        let best = grid
            .iter()
            .map(|&p| (p, sector_params(gamma, p).unwrap().theta))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        prop_assert!((best.0 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sector_chain_holds_on_every_exponent(gamma in 0.0f64..5.0, p in 1.01f64..30.0) {
        let c = sector_params(gamma, p).unwrap().c_theta;
        prop_assert!(0.5 * p * gamma <= c * (p - 1.0).sqrt() * (1.0 + 1e-14));
    }

    #[test]
    fn scaling_the_diffusion_leaves_b_gamma_theta(seed in any::<u64>(), n in 1usize..6, c in 0.1f64..10.0) {
        let m = model(seed, n);
        let g1 = HGeometry::new(m.clone()).unwrap();
        let g2 = HGeometry::new(m.with_scaled_diffusion(c).unwrap()).unwrap();
        prop_assert!((g1.b() - g2.b()).amax() <= 1e-9 * g1.b().amax().max(1.0));
        prop_assert!((g1.gamma() - g2.gamma()).abs() <= 1e-9 * (1.0 + g1.gamma()));
        let qi = m.q_inf().as_matrix() * c;
        prop_assert!((g2.model().q_inf().as_matrix() - &qi).amax() <= 1e-9 * qi.amax());
        for p in [1.5, 2.0, 4.0] {
            let (a, b) = (g1.sector_params(p).unwrap(), g2.sector_params(p).unwrap());
            prop_assert!((a.theta - b.theta).abs() <= 1e-9);
        }
    }

    #[test]
    fn generator_on_quadratics_matches_closed_form(seed in any::<u64>(), n in 1usize..6) {
        let m = model(seed, n);
        let g = HGeometry::new(m.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let c = { let r = DMatrix::from_fn(n, n, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)); &r + r.transpose() };
        let bv = normal_vector(n, &mut rng);
        let mm = { let r = DMatrix::from_fn(n, n, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)); &r * r.transpose() };
        let u = WeightFunction::quadratic(mm.clone()).unwrap();
        let f = CylinderFunction::quadratic(c.clone()).sum(&CylinderFunction::linear(bv.clone()));
        let x = normal_vector(n, &mut rng);
        let q = m.diffusion().as_matrix();
        let grad = &c * &x + &bv;
        let terms = [
            0.5 * (q * &c).trace(),
            (m.drift().as_matrix() * &x).dot(&grad),
            (drift_b(&m) * q * &grad).dot(&(&mm * &x * 2.0)),
        ];
        let want: f64 = terms.iter().sum();
        let scale = 1.0 + terms.iter().map(|t| t.abs()).sum::<f64>();
        let got = apply_generator(&g, &u, &f, &x);
        prop_assert!((got - want).abs() <= 1e-12 * scale, "{got} vs {want}");
    }

    #[test]
    fn dual_map_pairs_to_the_p_norm(re in -3.0f64..3.0, im in -3.0f64..3.0, p in 1.1f64..8.0) {
        let z = Complex::new(re, im);
        prop_assume!(z.norm() > 1e-3);
        let d = dual_value(z, p);
        prop_assert!(((z * d).re - z.norm().powf(p)).abs() <= 1e-12 * (1.0 + z.norm().powf(p)));
        prop_assert!((z * d).im.abs() <= 1e-12 * (1.0 + z.norm().powf(p)));
        // gradient of the dual of z(t) = z + t·dz against central differences
        let dz = DVector::from_vec(vec![Complex::new(0.3, -0.7)]);
        let h = 1e-6;
        let fd = (dual_value(z + dz[0] * h, p) - dual_value(z - dz[0] * h, p)) / (2.0 * h);
        let an = dual_gradient(z, &dz, p)[0];
        prop_assert!((fd - an).norm() <= 1e-5 * (1.0 + an.norm()));
    }
}

#[test]
fn integration_is_linear_on_shared_samples() {
    let m = OuModel::nonnormal().unwrap();
    let w = WeightedMeasure::new(m, WeightFunction::log_cosh(DVector::from_vec(vec![0.5, 0.2, -0.4]))).unwrap();
    let f = |x: &DVector<f64>| x[0].cos();
    let g = |x: &DVector<f64>| x[1] * x[2];
    let a = integrate_nu(&w, f, 5000, 3).unwrap().mean;
    let b = integrate_nu(&w, g, 5000, 3).unwrap().mean;
    let ab = integrate_nu(&w, |x| 2.0 * f(x) - 3.0 * g(x), 5000, 3).unwrap().mean;
    assert!((ab - (2.0 * a - 3.0 * b)).abs() < 1e-12);
}

#[test]
fn unweighted_ibp_passes() {
    let m = OuModel::rotation(0.9).unwrap();
    let g = HGeometry::new(m.clone()).unwrap();
    let w = WeightedMeasure::unweighted(m);
    let f = CylinderFunction::cos_linear(DVector::from_vec(vec![0.7, -0.4]), 0.3);
    let h = g.b() * g.model().diffusion().as_matrix() * DVector::from_vec(vec![1.0, 0.5]);
    let r = check_ibp(&w, &g, &f, &h, 100_000, 11);
    assert!(r.passed, "{r:#?}");
}

#[test]
fn standard_error_scales_like_inverse_root_n() {
    // quadrupling n halves the error; doubling divides it by √2
    let m = OuModel::isotropic(2).unwrap();
    let w = WeightedMeasure::unweighted(m);
    let se = |n| integrate_nu(&w, |x| x[0] * x[0] + x[1], n, 21).unwrap().std_error;
    let (s1, s2, s4) = (se(20_000), se(40_000), se(80_000));
    let r2 = s1 / s2 / std::f64::consts::SQRT_2;
    let r4 = s1 / s4 / 2.0;
    assert!((1.0 / 1.5..1.5).contains(&r2), "{r2}");
    assert!((1.0 / 1.5..1.5).contains(&r4), "{r4}");
}

#[test]
fn symmetric_part_of_the_form_is_exact() {
    let m = OuModel::nonnormal().unwrap();
    let g = HGeometry::new(m.clone()).unwrap();
    let w = WeightedMeasure::new(
        m.clone(),
        WeightFunction::quadratic(DMatrix::identity(3, 3) * 0.3).unwrap(),
    )
    .unwrap();
    let s = w.sample(5000, 4).unwrap();
    let fc = FormChecks::new(&g, &w, &s, Tolerances::default());
    let fam = FunctionSampler::new(&m).builtin_family(&mut ChaCha8Rng::seed_from_u64(4));
    for u in &fam {
        for v in &fam {
            assert!(fc.symmetric_part(u, v).passed);
            assert!(fc.coercivity(u).passed);
        }
    }
}
