//! Stationary covariance of a random stable system three ways: the
//! Lyapunov solver, the block-exponential sandwich integral and
//! Gauss–Legendre quadrature of `e^{sA} Q e^{sAᵀ}`.

use ou_sector::linalg::integrate_sandwich;
use ou_sector::linalg::quadrature::sandwich_by_quadrature;
use ou_sector::model::OuModel;
use rand::SeedableRng;

fn main() -> ou_sector::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for n in [2, 4, 8] {
        let m = OuModel::random(n, &mut rng)?;
        let t = 50.0 / m.drift().gap();
        let qi = m.q_inf().as_matrix();
        let block = integrate_sandwich(m.drift(), m.diffusion(), t)?;
        let quad = sandwich_by_quadrature(m.drift().as_matrix(), m.diffusion().as_matrix(), t, 32)?;
        println!(
            "n = {n}: residual {:.1e}, |Q_inf - Q_T| block {:.1e}, quadrature {:.1e} (T = {t:.1})",
            m.lyapunov_residual(),
            (block.as_matrix() - qi).amax() / qi.amax(),
            (quad - qi).amax() / qi.amax(),
        );
    }
    Ok(())
}
