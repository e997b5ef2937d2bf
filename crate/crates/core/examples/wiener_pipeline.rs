//! Runs the sector pipeline on the `L²(0,1)` spectral truncation and prints
//! the Nyström eigenvalues of the Brownian covariance.

use ou_sector::suites::SuiteSettings;
use ou_sector::wiener::{classical_eigen, classical_eigenvalue, wiener_sector_pipeline};

fn main() -> ou_sector::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    for (k, l) in classical_eigen(2000, 5)?.iter().enumerate() {
        println!("lambda_{} = {l:.8}  (exact {:.8})", k + 1, classical_eigenvalue(k + 1));
    }
    let settings = SuiteSettings {
        ps: vec![1.5, 2.0, 4.0],
        seed: 1,
        ..SuiteSettings::default()
    };
    let start = std::time::Instant::now();
    let report = wiener_sector_pipeline(n, &settings)?;
    for (path, r) in report.walk() {
        if r.children.is_empty() || path.matches('/').count() < 2 {
            println!("{} {path}", if r.passed { "ok  " } else { "FAIL" });
        }
    }
    println!("N = {n}: passed = {} in {:.1?}", report.passed, start.elapsed());
    Ok(())
}
