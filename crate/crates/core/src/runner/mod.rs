//! Turns an [`ExperimentConfig`] into executed suites and a
//! [`RunReport`], and writes reports in the supported formats.

mod config;
mod emit;
mod store;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{parse_config, ConfigErrors, ConfigIssue, ExperimentConfig, ModelSource, WeightSpec};
pub use emit::{csv_rows, emit, plot_data, render, theta_curve, CsvRow, FieldOfValues, Format, PlotData, ThetaCurve};
pub use store::{IndexEntry, RunStore, StoredRun};

use crate::model::{HGeometry, SectorParams};
use crate::report::CheckReport;
use crate::sector::FovReport;
use crate::suites::{self, Suite};
use crate::wiener::wiener_report;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Numerical(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialization(String),
}

/// Quantities derived from the model before any suite runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub dim: usize,
    pub drift: Vec<Vec<f64>>,
    pub diffusion: Vec<Vec<f64>>,
    pub q_inf: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub gamma: f64,
    /// `‖B‖_{L(H)}`.
    pub b_norm: f64,
    pub weight: String,
    pub sector: Vec<SectorParams>,
}

impl Derived {
    pub fn new(g: &HGeometry, weight: &str, ps: &[f64]) -> crate::Result<Self> {
        let m = g.model();
        Ok(Self {
            dim: g.dim(),
            drift: config::from_matrix(m.drift().as_matrix()),
            diffusion: config::from_matrix(m.diffusion().as_matrix()),
            q_inf: config::from_matrix(m.q_inf().as_matrix()),
            b: config::from_matrix(g.b()),
            gamma: g.gamma(),
            b_norm: g.rkhs_constant(),
            weight: weight.to_string(),
            sector: ps.iter().map(|&p| g.sector_params(p)).collect::<crate::Result<_>>()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub suites: Vec<SuiteTiming>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub derived: Derived,
    pub suites: Vec<CheckReport>,
    pub fields_of_values: Vec<FieldOfValues>,
    pub passed: bool,
    /// Wall-clock data; the only part that differs between identical runs.
    pub timing: Timing,
}

impl RunReport {
    /// Every failing leaf, with its suite path.
    pub fn failures(&self) -> Vec<String> {
        self.suites.iter().flat_map(CheckReport::failures).collect()
    }

    /// Number of executed checks, aggregates included.
    pub fn check_count(&self) -> usize {
        self.suites.iter().map(CheckReport::count).sum()
    }
}

/// Content hash of a configuration: the first 16 hex digits of the SHA-256
/// of its canonical JSON form.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_string(cfg).expect("configuration serializes");
    hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
}

/// Runs the configured suites in dependency order. Failed checks are
/// recorded, never fatal; only an unbuildable model is an error.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunnerError> {
    let start = Instant::now();
    let w = cfg.measure()?;
    let g = HGeometry::new(w.model().clone())?;
    let settings = cfg.settings();
    let derived = Derived::new(&g, w.weight().name(), &cfg.p)?;
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    let mut fields = Vec::new();
    if let ModelSource::Wiener { modes } = cfg.model {
        let t = Instant::now();
        let r = match wiener_report(modes) {
            Ok((r, _)) => r,
            Err(e) => CheckReport::errored("truncation", &e),
        };
        timings.push(SuiteTiming {
            name: r.name.clone(),
            seconds: t.elapsed().as_secs_f64(),
        });
        reports.push(r);
    }
    let mut selected = cfg.suites.clone();
    selected.sort();
    selected.dedup();
    for suite in selected {
        let t = Instant::now();
        let r = if suite == Suite::Galerkin {
            let out = suites::galerkin_suite(&g, &w, &settings);
            fields = out
                .fields
                .iter()
                .map(|(p, f)| FieldOfValues::from_report(*p, f))
                .collect();
            out.report
        } else {
            suites::run_suites(&g, &w, &[suite], &settings).0.remove(0)
        };
        timings.push(SuiteTiming {
            name: suite.name().into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        config_hash: config_hash(cfg),
        config: cfg.clone(),
        derived,
        suites: reports,
        fields_of_values: fields,
        passed,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            suites: timings,
        },
    })
}

impl FieldOfValues {
    pub fn from_report(p: f64, f: &FovReport) -> Self {
        Self {
            p,
            theta: f.theta,
            c_theta: f.c_theta,
            contained: f.contained,
            boundary: f.boundary.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}
