//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005, degrees 3, 5, 7, 9, 13).

use nalgebra::DMatrix;

use super::require_square;
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Returns `e^{tM}`.
pub fn matrix_exp(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    require_square(m, "matrix_exp argument")?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("time {t} is not finite")));
    }
    let a = m * t;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("scaled matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let nrm = norm1(&a);

    for &(deg, theta) in &THETA {
        if nrm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return solve_pade(&pade_low(&a, &id, coeffs));
        }
    }

    let s = if nrm > THETA_13 {
        (nrm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = &a / 2f64.powi(s);
    let mut r = solve_pade(&pade13(&a, &id))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Odd/even parts `(U, V)` of a low-degree Padé approximant.
fn pade_low(a: &DMatrix<f64>, id: &DMatrix<f64>, b: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let a2 = a * a;
    let mut pow = id.clone();
    let mut u = id * b[1];
    let mut v = id * b[0];
    for k in 1..b.len() / 2 {
        pow = &pow * &a2;
        u += &pow * b[2 * k + 1];
        v += &pow * b[2 * k];
    }
    (a * u, v)
}

fn pade13(a: &DMatrix<f64>, id: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a * (&a6 * u_inner + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + id * b[1]);
    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_inner + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + id * b[0];
    (u, v)
}

fn solve_pade((u, v): &(DMatrix<f64>, DMatrix<f64>)) -> Result<DMatrix<f64>> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Conditioning("Padé denominator is singular".into()))
}
