//! Runs an experiment from a TOML description and prints its CSV table.

use ou_sector::runner::{parse_config, render, run, Format};

const CONFIG: &str = r#"
seed = 5
samples = 20000
p = [1.5, 2, 4]
suites = ["drift_algebra", "sector_angle", "numerical_range", "galerkin"]

[model]
builtin = "random"
dim = 3
seed = 12

[weight]
kind = "logcosh"
b = [0.4, -0.2, 0.9]
"#;

fn main() {
    let cfg = match parse_config(CONFIG) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let report = run(&cfg).expect("model builds");
    println!("{}", render(&report, Format::CsvTables).expect("csv renders"));
    println!("passed: {}, config hash {}", report.passed, report.config_hash);
}
