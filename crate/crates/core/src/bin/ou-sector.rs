//! Command-line front end: `ou-sector <model|forms|sector|wiener|all>`.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on a
//! usage, configuration or output error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ou_sector::runner::{
    self, emit, parse_config, render, ExperimentConfig, Format, ModelSource, RunReport, RunStore, WeightSpec,
};
use ou_sector::suites::Suite;

#[derive(Parser)]
#[command(
    name = "ou-sector",
    version,
    about = "Sectoriality checks for weighted Ornstein-Uhlenbeck operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration (see docs/config.md).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; every suite derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count per statistical suite.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Directory for the emitted file and the run store.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json, csv-tables or plot-data.
    #[arg(long, global = true, value_parser = clap::value_parser!(Format))]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Q∞, B, γ and θ_p, with the drift, Lyapunov and angle suites.
    Model,
    /// Dirichlet-form and integration-by-parts suites.
    Forms,
    /// Pointwise identities, numerical range and Galerkin field of values.
    Sector,
    /// The L²(0,1) spectral-truncation pipeline.
    Wiener,
    /// Every suite selected by the configuration.
    All,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}:\n{e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        if n < 100 {
            return Err(format!("--samples: at least 100 samples are needed, got {n}"));
        }
        cfg.samples = n;
    }
    cfg.suites = match cli.command {
        Command::Model => vec![Suite::DriftAlgebra, Suite::Lyapunov, Suite::SectorAngle],
        Command::Forms => vec![Suite::Forms, Suite::Ibp],
        Command::Sector => vec![Suite::Identities, Suite::NumericalRange, Suite::Galerkin],
        Command::Wiener => ou_sector::wiener::PIPELINE_SUITES.to_vec(),
        Command::All => cfg.suites,
    };
    if matches!(cli.command, Command::Wiener) && !matches!(cfg.model, ModelSource::Wiener { .. }) {
        let n = 8;
        cfg.model = ModelSource::Wiener { modes: n };
        cfg.weight = WeightSpec::Quadratic {
            m: (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        };
    }
    Ok(cfg)
}

fn fmt_matrix(m: &[Vec<f64>]) -> String {
    m.iter()
        .map(|r| r.iter().map(|x| format!("{x:>12.6}")).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n  ")
}

fn summary(r: &RunReport) -> String {
    let d = &r.derived;
    let mut s = format!(
        "model: dim {}, weight {}\nQ_inf:\n  {}\nB:\n  {}\ngamma = {:.12}\n|B|_H = {:.12}\n",
        d.dim,
        d.weight,
        fmt_matrix(&d.q_inf),
        fmt_matrix(&d.b),
        d.gamma,
        d.b_norm
    );
    for sp in &d.sector {
        s += &format!("p = {:<6} theta_p = {:.12}  cot = {:.12}\n", sp.p, sp.theta, sp.c_theta);
    }
    for (suite, t) in r.suites.iter().zip(&r.timing.suites) {
        s += &format!(
            "[{}] {} ({:.2}s)\n",
            if suite.passed { "PASS" } else { "FAIL" },
            suite.name,
            t.seconds
        );
    }
    for f in r.failures() {
        s += &format!("  failed: {f}\n");
    }
    s += &format!(
        "{} checks, {}\n",
        r.check_count(),
        if r.passed { "all passed" } else { "FAILURES" }
    );
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match runner::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(dir) => {
            let format = cli.format.unwrap_or(Format::Json);
            emit(&report, format, dir)
                .and_then(|path| RunStore::open(dir.join("runs"))?.save(&report).map(|s| (path, s.path)))
                .map(|(a, b)| {
                    print!("{}", summary(&report));
                    println!("wrote {} and {}", a.display(), b.display());
                })
        }
        None => match cli.format {
            Some(f) => render(&report, f).map(|s| println!("{s}")),
            None => {
                print!("{}", summary(&report));
                Ok(())
            }
        },
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
