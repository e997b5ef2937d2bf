//! The `L²(0,1)` spectral truncation and the Brownian covariance.

mod common;

use std::f64::consts::PI;

use ou_sector::linalg::integrate_sandwich;
use ou_sector::wiener::{
    assemble_truncation, classical_eigen, classical_eigenvalue, diagonal_qt_trace, sqrt2_qt_trace, square_root_drift,
    trace_limit, wiener_q_infty,
};

#[test]
fn single_mode_covariance_is_positive() {
    let t = assemble_truncation(1).unwrap();
    assert!(t.q[(0, 0)] > 0.0);
    assert!((t.q[(0, 0)] - 3.0 / (PI * PI)).abs() < 1e-13);
}

#[test]
fn eight_mode_covariance_is_symmetric_positive_definite() {
    let t = assemble_truncation(8).unwrap();
    assert!((&t.q - t.q.transpose()).amax() <= 1e-12);
    assert!(t.q.clone().symmetric_eigen().eigenvalues.min() > 0.0);
}

#[test]
fn lyapunov_matches_long_horizon_quadrature() {
    for n in 1..=8 {
        let t = assemble_truncation(n).unwrap();
        let m = t.model().unwrap();
        let horizon = 50.0 / m.drift().gap();
        let qt = common::sandwich_oracle(m.drift().as_matrix(), m.diffusion().as_matrix(), horizon);
        let qi = m.q_inf().as_matrix();
        assert!((qi - &qt).amax() / qi.amax() <= 1e-8, "N = {n}");
        assert!(m.lyapunov_residual() <= 1e-10);
    }
}

#[test]
fn traces_increase_towards_one_sixtieth() {
    let traces: Vec<f64> = (1..=12)
        .map(|n| wiener_q_infty(&assemble_truncation(n).unwrap()).unwrap().trace)
        .collect();
    assert!(traces.windows(2).all(|w| w[1] > w[0]));
    assert!(traces.iter().all(|&t| t < trace_limit()));
    // the k⁻⁴ tail beyond N = 8 is below 1e-3 relative
    assert!((trace_limit() - traces[7]) / trace_limit() < 1e-3);
}

#[test]
fn qt_trace_is_monotone_and_follows_the_diagonal_formula() {
    let t = assemble_truncation(6).unwrap();
    let m = t.model().unwrap();
    let mut last = 0.0;
    for s in [0.001, 0.01, 0.1, 1.0] {
        let tr = integrate_sandwich(m.drift(), m.diffusion(), s)
            .unwrap()
            .as_matrix()
            .trace();
        assert!(tr > last);
        last = tr;
        assert!((tr - diagonal_qt_trace(6, s)).abs() < 1e-12);
        // the √2 form has an extra factor √2 and the exponent k²π²t
        assert!((tr - sqrt2_qt_trace(6, s)).abs() > 1e-4);
    }
    assert!(last < wiener_q_infty(&t).unwrap().trace);
}

#[test]
fn nystrom_eigenvalues_converge_at_second_order() {
    let err = |m| {
        classical_eigen(m, 3)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(k, l)| (l - classical_eigenvalue(k + 1)).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2, e3) = (err(200), err(400), err(800));
    for r in [e1 / e2, e2 / e3] {
        assert!((3.0..5.0).contains(&r), "ratio {r}");
    }
    let ev = classical_eigen(2000, 20).unwrap();
    assert!(ev.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn square_root_drift_has_half_identity_limit() {
    let r = square_root_drift(6).unwrap();
    assert!(r.passed);
    for c in &r.children {
        assert!(c.metrics["commuting_deviation"] < 1e-12, "{}", c.name);
        assert!(c.metrics["relation_deviation"] > 0.1, "{}", c.name);
    }
}
