//! One-dimensional Gauss rules.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Legendre rule on `[-1, 1]` (Newton iteration on the three-term
    /// recurrence).
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Gauss–Hermite rule for the standard normal density: `Σ wᵢ g(xᵢ) ≈ E g(Z)`.
    pub fn hermite_normal(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Hermite needs at least one node");
        // Jacobi matrix of the probabilists' Hermite polynomials.
        let j = DMatrix::from_fn(n, n, |r, c| {
            if r + 1 == c || c + 1 == r {
                (r.max(c) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // symmetrize against eigen-solver round-off
        for i in 0..n / 2 {
            let x = 0.5 * (pairs[n - 1 - i].0 - pairs[i].0);
            let w = 0.5 * (pairs[n - 1 - i].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[n - 1 - i] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        }
    }

    /// The rule mapped affinely onto `[a, b]` (Legendre rules only).
    pub fn on_interval(&self, a: f64, b: f64) -> Self {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        Self {
            nodes: self.nodes.iter().map(|x| m + h * x).collect(),
            weights: self.weights.iter().map(|w| w * h).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule with `panels` equal panels on `[a, b]`.
pub fn composite_legendre(a: f64, b: f64, panels: usize, order: usize) -> GaussRule {
    let base = GaussRule::legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let r = base.on_interval(a + p as f64 * h, a + (p + 1) as f64 * h);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    GaussRule { nodes, weights }
}

/// `∫₀ᵀ e^{sA} Q e^{sAᵀ} ds` by Gauss–Legendre on geometrically growing
/// panels: the first has width `1/(4‖A‖₁)`, each next one doubles. Used as
/// an independent check of the block-exponential method.
pub fn sandwich_by_quadrature(a: &DMatrix<f64>, q: &DMatrix<f64>, t: f64, order: usize) -> crate::Result<DMatrix<f64>> {
    let n = a.nrows();
    let norm = a.abs().row_sum().max().max(1e-12);
    let mut edges = vec![0.0];
    let mut h = 0.25 / norm;
    while *edges.last().unwrap() < t {
        let next = (edges.last().unwrap() + h).min(t);
        edges.push(next);
        h *= 2.0;
    }
    let base = GaussRule::legendre(order);
    let mut acc = DMatrix::zeros(n, n);
    for w in edges.windows(2) {
        let r = base.on_interval(w[0], w[1]);
        for (s, wt) in r.nodes.iter().zip(&r.weights) {
            let e = super::matrix_exp(a, *s)?;
            acc += &e * q * e.transpose() * *wt;
        }
    }
    Ok(super::symmetrize(&acc))
}

/// Tensor-product Gauss–Hermite rule for `N(0, Id)` on `ℝᵈ`.
#[derive(Clone, Debug)]
pub struct TensorRule {
    pub points: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
}

pub fn tensor_hermite(dim: usize, nodes: usize) -> TensorRule {
    let rule = GaussRule::hermite_normal(nodes);
    let total = nodes.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        points.push(DVector::from_iterator(dim, idx.iter().map(|&i| rule.nodes[i])));
        weights.push(idx.iter().map(|&i| rule.weights[i]).product());
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < nodes {
                break;
            }
            *slot = 0;
        }
    }
    TensorRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let r = GaussRule::legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 0 { 2.0 / (deg + 1) as f64 } else { 0.0 };
                let got = r.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn hermite_reproduces_normal_moments() {
        // E Z^{2k} = (2k-1)!!
        for n in [1usize, 2, 5, 10, 20] {
            let r = GaussRule::hermite_normal(n);
            let mut dfact = 1.0;
            for k in 0..n {
                if k > 0 {
                    dfact *= (2 * k - 1) as f64;
                }
                let got = r.integrate(|x| x.powi(2 * k as i32));
                assert!((got - dfact).abs() <= 1e-10 * dfact, "n={n} k={k}: {got} vs {dfact}");
                assert!(r.integrate(|x| x.powi(2 * k as i32 + 1)).abs() < 1e-10 * dfact.max(1.0));
            }
        }
    }

    #[test]
    fn hermite_integrates_cosine() {
        // E cos(bZ) = exp(-b²/2)
        let r = GaussRule::hermite_normal(20);
        for &b in &[0.3, 1.0, 2.0] {
            let got = r.integrate(|x| (b * x).cos());
            assert!((got - (-0.5 * b * b).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_rule_integrates_mixed_moments() {
        let r = tensor_hermite(3, 4);
        assert_eq!(r.points.len(), 64);
        let m =
            |f: &dyn Fn(&DVector<f64>) -> f64| -> f64 { r.points.iter().zip(&r.weights).map(|(x, w)| w * f(x)).sum() };
        assert!((m(&|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((m(&|x| x[0] * x[0] * x[2] * x[2]) - 1.0).abs() < 1e-13);
        assert!((m(&|x| x[1].powi(6)) - 15.0).abs() < 1e-11);
        assert!(m(&|x| x[0] * x[1]).abs() < 1e-14);
    }

    #[test]
    fn quadrature_sandwich_matches_scalar_integral() {
        let a = DMatrix::from_element(1, 1, -3.0);
        let q = DMatrix::from_element(1, 1, 2.0);
        for t in [0.01, 1.0, 30.0] {
            let got = sandwich_by_quadrature(&a, &q, t, 20).unwrap()[(0, 0)];
            let want = (1.0 - (-6.0 * t).exp()) / 3.0;
            assert!((got - want).abs() < 1e-13, "t={t}");
        }
    }
}
