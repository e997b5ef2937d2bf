//! Finite sections of the generator on Hermite polynomials.
//!
//! The basis is `b_α(x) = Π He_{αᵢ}(yᵢ)/√αᵢ!` with `y = Q∞^{-1/2}x`, so it is
//! orthonormal under `μ∞`. Entries are `M_ij = ∫ (L b_j) b_i dν∞` and
//! `G_ij = ∫ b_i b_j dν∞`.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::quadrature::tensor_hermite;
use crate::linalg::{eigenvalues, spd_inv_sqrt, spd_sqrt, SpdMatrix};
use crate::measure::WeightedMeasure;
use crate::model::HGeometry;

/// Quadrature grids above this size fall back to Monte Carlo.
pub const MAX_EXACT_NODES: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assembly {
    /// `∫ (L b_j) b_i dν`.
    Generator,
    /// `∫ [B D_H b_j, D_H b_i]_H dν`.
    Form,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Moments {
    /// Tensor Gauss–Hermite, exact for the polynomial entries.
    Exact {
        nodes_per_axis: usize,
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinOptions {
    pub degree: usize,
    pub assembly: Assembly,
    pub samples: usize,
    pub seed: u64,
    /// Use Monte Carlo even when exact moments are available.
    pub force_monte_carlo: bool,
}

impl GalerkinOptions {
    pub fn new(degree: usize, samples: usize, seed: u64) -> Self {
        Self {
            degree,
            assembly: Assembly::Generator,
            samples,
            seed,
            force_monte_carlo: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GalerkinSystem {
    pub basis: Vec<Vec<usize>>,
    pub m: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    pub moments: Moments,
}

impl GalerkinSystem {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Eigenvalues of the pencil `(M, G)`.
    pub fn spectrum(&self) -> Result<Vec<Complex<f64>>> {
        let g = SpdMatrix::new(self.gram.clone()).map_err(|e| Error::Conditioning(format!("Gram matrix: {e}")))?;
        let w = spd_inv_sqrt(&g);
        Ok(eigenvalues(&(&w * &self.m * &w)))
    }
}

/// Multi-indices of total degree `≤ d`, ordered by degree.
fn multi_indices(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=d {
        rec(n, total, &mut Vec::new(), &mut out);
    }
    out
}

/// Normalized Hermite values `He_k(y)/√k!` for `k ≤ d`.
fn hermite_row(y: f64, d: usize) -> Vec<f64> {
    let mut he = vec![0.0; d + 1];
    he[0] = 1.0;
    if d >= 1 {
        he[1] = y;
    }
    for k in 1..d {
        he[k + 1] = y * he[k] - k as f64 * he[k - 1];
    }
    let mut fact = 1.0;
    for (k, h) in he.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *h /= fact.sqrt();
    }
    he
}

struct BasisEval {
    value: Vec<f64>,
    grad: Vec<DVector<f64>>,
    hess: Vec<DMatrix<f64>>,
}

fn evaluate_basis(basis: &[Vec<usize>], y: &DVector<f64>, d: usize, second: bool) -> BasisEval {
    let n = y.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| hermite_row(y[i], d)).collect();
    // d/dy (He_k/√k!) = √k He_{k−1}/√(k−1)!
    let deriv = |i: usize, k: usize, order: usize| -> f64 {
        match order {
            0 => rows[i][k],
            1 if k >= 1 => (k as f64).sqrt() * rows[i][k - 1],
            2 if k >= 2 => ((k * (k - 1)) as f64).sqrt() * rows[i][k - 2],
            _ => 0.0,
        }
    };
    let mut value = Vec::with_capacity(basis.len());
    let mut grad = Vec::with_capacity(basis.len());
    let mut hess = Vec::with_capacity(basis.len());
    for alpha in basis {
        let term = |orders: &[usize]| -> f64 { (0..n).map(|i| deriv(i, alpha[i], orders[i])).product() };
        let mut orders = vec![0usize; n];
        value.push(term(&orders));
        let g = DVector::from_fn(n, |j, _| {
            orders.iter_mut().for_each(|o| *o = 0);
            orders[j] = 1;
            term(&orders)
        });
        grad.push(g);
        if second {
            let h = DMatrix::from_fn(n, n, |j, l| {
                orders.iter_mut().for_each(|o| *o = 0);
                orders[j] += 1;
                orders[l] += 1;
                term(&orders)
            });
            hess.push(h);
        }
    }
    BasisEval { value, grad, hess }
}

pub fn galerkin_matrix(
    g: &HGeometry,
    w: &WeightedMeasure,
    degree: usize,
    n: usize,
    seed: u64,
) -> Result<GalerkinSystem> {
    assemble(g, w, &GalerkinOptions::new(degree, n, seed))
}

pub fn assemble(g: &HGeometry, w: &WeightedMeasure, opts: &GalerkinOptions) -> Result<GalerkinSystem> {
    if opts.degree == 0 {
        return Err(Error::Domain("basis degree must be at least 1".into()));
    }
    let model = g.model();
    let dim = model.dim();
    let d = opts.degree;
    let basis = multi_indices(dim, d);
    let root = spd_sqrt(model.q_inf()).into_inner();
    let whiten = spd_inv_sqrt(model.q_inf());
    let nodes = d + 1;
    let exact_ok =
        w.weight().is_zero() && !opts.force_monte_carlo && (nodes as f64).powi(dim as i32) <= MAX_EXACT_NODES as f64;

    // Points in y-coordinates with quadrature weights that include e^{-U}.
    let (ys, weights, moments) = if exact_ok {
        let rule = tensor_hermite(dim, nodes);
        (rule.points, rule.weights, Moments::Exact { nodes_per_axis: nodes })
    } else {
        let s = w.sample(opts.samples, opts.seed)?;
        let nn = s.len() as f64;
        let ys: Vec<DVector<f64>> = s.points.iter().map(|x| &whiten * x).collect();
        let ws: Vec<f64> = s.weights.iter().map(|v| v / nn).collect();
        (
            ys,
            ws,
            Moments::MonteCarlo {
                samples: opts.samples,
                seed: opts.seed,
            },
        )
    };

    let q = model.diffusion().as_matrix();
    let qy = &whiten * q * &whiten;
    let ay = &whiten * model.drift().as_matrix() * &root;
    let by = &whiten * g.b() * q * &whiten;
    let weight_dir = &whiten * q * g.b().transpose();
    let k = basis.len();
    let generator_side = opts.assembly == Assembly::Generator;

    let zero = || (DMatrix::<f64>::zeros(k, k), DMatrix::<f64>::zeros(k, k));
    let (m, gram) = ys
        .par_iter()
        .zip(weights.par_iter())
        .fold(zero, |(mut m, mut gram), (y, &wt)| {
            if wt == 0.0 {
                return (m, gram);
            }
            let ev = evaluate_basis(&basis, y, d, generator_side);
            let vals = DVector::from_column_slice(&ev.value);
            gram += &vals * vals.transpose() * wt;
            if generator_side {
                let x = &root * y;
                let drift = &ay * y
                    + if w.weight().is_zero() {
                        DVector::zeros(dim)
                    } else {
                        &weight_dir * w.weight().gradient(&x)
                    };
                let lb = DVector::from_fn(k, |j, _| {
                    0.5 * qy.component_mul(&ev.hess[j]).sum() + drift.dot(&ev.grad[j])
                });
                m += &vals * lb.transpose() * wt;
            } else {
                let gmat = DMatrix::from_fn(dim, k, |r, c| ev.grad[c][r]);
                m += gmat.transpose() * &by * &gmat * wt;
            }
            (m, gram)
        })
        .reduce(zero, |a, b| (a.0 + b.0, a.1 + b.1));

    if gram.clone().cholesky().is_none() {
        return Err(Error::Conditioning(format!(
            "Gram matrix of the degree-{d} basis ({k} functions) is not positive definite; \
             lower the degree or raise the sample count"
        )));
    }
    Ok(GalerkinSystem {
        basis,
        m,
        gram,
        moments,
    })
}
