//! Report output: full JSON, one CSV row per check, and plot data.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{RunReport, RunnerError};
use crate::model::sector_params;
use crate::report::Relation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    CsvTables,
    PlotData,
}

impl Format {
    pub fn file_name(self) -> &'static str {
        match self {
            Format::Json => "report.json",
            Format::CsvTables => "checks.csv",
            Format::PlotData => "plot-data.json",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::CsvTables => "csv-tables",
            Format::PlotData => "plot-data",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv-tables" | "csv" => Ok(Format::CsvTables),
            "plot-data" => Ok(Format::PlotData),
            _ => Err(format!("unknown format `{s}` (expected json, csv-tables or plot-data)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub path: String,
    pub passed: bool,
    pub relation: Relation,
    pub statistic: f64,
    pub bound: f64,
    pub std_error: Option<f64>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
}

/// One row per executed check, aggregates included, in report order.
pub fn csv_rows(report: &RunReport) -> Vec<CsvRow> {
    report
        .suites
        .iter()
        .flat_map(|s| s.walk())
        .map(|(path, c)| CsvRow {
            path,
            passed: c.passed,
            relation: c.relation,
            statistic: c.statistic,
            bound: c.bound,
            std_error: c.std_error,
            n_samples: c.n_samples,
            seed: c.seed,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaCurve {
    pub gamma: f64,
    pub label: String,
    pub p: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldOfValues {
    pub p: f64,
    pub theta: f64,
    pub c_theta: f64,
    pub contained: bool,
    /// `[re, im]` pairs.
    pub boundary: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub theta_curves: Vec<ThetaCurve>,
    pub fields_of_values: Vec<FieldOfValues>,
}

/// `θ_p` on a logarithmic grid of `points` exponents in `[1.05, 20]`,
/// with `p = 2` included.
pub fn theta_curve(gamma: f64, label: &str, points: usize) -> ThetaCurve {
    let (lo, hi) = (1.05f64.ln(), 20f64.ln());
    let mut p: Vec<f64> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1).max(1) as f64).exp())
        .collect();
    p.push(2.0);
    p.sort_by(f64::total_cmp);
    p.dedup();
    let theta = p
        .iter()
        .map(|&x| {
            sector_params(gamma, x)
                .map(|s| s.theta)
                .expect("grid exponents exceed 1")
        })
        .collect();
    ThetaCurve {
        gamma,
        label: label.into(),
        p,
        theta,
    }
}

/// `θ_p` curves for `γ ∈ {0, ½, 1}` and the model's own `γ`, plus the
/// Galerkin field-of-values boundaries.
pub fn plot_data(report: &RunReport) -> PlotData {
    let mut curves: Vec<ThetaCurve> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&g| theta_curve(g, &format!("gamma={g}"), 200))
        .collect();
    curves.push(theta_curve(report.derived.gamma, "model", 200));
    PlotData {
        theta_curves: curves,
        fields_of_values: report.fields_of_values.clone(),
    }
}

/// The report rendered in `format`.
pub fn render(report: &RunReport, format: Format) -> Result<String, RunnerError> {
    let ser = |e: &dyn fmt::Display| RunnerError::Serialization(e.to_string());
    match format {
        Format::Json => serde_json::to_string_pretty(report).map_err(|e| ser(&e)),
        Format::PlotData => serde_json::to_string_pretty(&plot_data(report)).map_err(|e| ser(&e)),
        Format::CsvTables => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in csv_rows(report) {
                w.serialize(row).map_err(|e| ser(&e))?;
            }
            let bytes = w.into_inner().map_err(|e| ser(&e))?;
            String::from_utf8(bytes).map_err(|e| ser(&e))
        }
    }
}

/// Writes the rendered report into `dir` under the format's file name.
pub fn emit(report: &RunReport, format: Format, dir: &Path) -> Result<PathBuf, RunnerError> {
    let io = |path: &Path, source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = dir.join(format.file_name());
    std::fs::write(&path, render(report, format)?).map_err(|e| io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_is_largest_at_two_for_positive_gamma() {
        for g in [0.5, 1.0] {
            let c = theta_curve(g, "", 200);
            let (i, _) = c.theta.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
            assert_eq!(c.p[i], 2.0);
        }
        let flat = theta_curve(0.0, "", 50);
        let i = flat.p.iter().position(|&p| p == 2.0).unwrap();
        assert_eq!(flat.theta[i], std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn formats_parse() {
        for f in [Format::Json, Format::CsvTables, Format::PlotData] {
            assert_eq!(f.to_string().parse::<Format>().unwrap(), f);
        }
    }
}
