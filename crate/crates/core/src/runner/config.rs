//! Experiment configuration: a TOML document, validated into an
//! [`ExperimentConfig`]. The grammar is documented in `docs/config.md`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::measure::{WeightFunction, WeightedMeasure};
use crate::model::OuModel;
use crate::suites::{Suite, SuiteSettings};
use crate::tolerance::Tolerances;
use crate::wiener::{assemble_truncation, MAX_PIPELINE_MODES};

/// Where the model comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ModelSource {
    Rotation { alpha: f64 },
    Isotropic { dim: usize },
    Nonnormal,
    Diagonal { drift: Vec<f64>, diffusion: Vec<f64> },
    Random { dim: usize, seed: u64 },
    Explicit { a: Vec<Vec<f64>>, q: Vec<Vec<f64>> },
    Wiener { modes: usize },
}

impl ModelSource {
    pub fn build(&self) -> crate::Result<OuModel> {
        match self {
            ModelSource::Rotation { alpha } => OuModel::rotation(*alpha),
            ModelSource::Isotropic { dim } => OuModel::isotropic(*dim),
            ModelSource::Nonnormal => OuModel::nonnormal(),
            ModelSource::Diagonal { drift, diffusion } => OuModel::diagonal(drift, diffusion),
            ModelSource::Random { dim, seed } => {
                use rand::SeedableRng;
                OuModel::random(*dim, &mut rand_chacha::ChaCha8Rng::seed_from_u64(*seed))
            }
            ModelSource::Explicit { a, q } => OuModel::from_matrices(to_matrix(a), to_matrix(q)),
            ModelSource::Wiener { modes } => assemble_truncation(*modes)?.model(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    None,
    /// `U(x) = xᵀMx`.
    Quadratic {
        m: Vec<Vec<f64>>,
    },
    /// `U(x) = log cosh⟨x, b⟩`.
    LogCosh {
        b: Vec<f64>,
    },
}

impl WeightSpec {
    pub fn build(&self, dim: usize) -> crate::Result<WeightFunction> {
        match self {
            WeightSpec::None => Ok(WeightFunction::zero(dim)),
            WeightSpec::Quadratic { m } => WeightFunction::quadratic(to_matrix(m)),
            WeightSpec::LogCosh { b } => Ok(WeightFunction::log_cosh(DVector::from_column_slice(b))),
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            WeightSpec::None => None,
            WeightSpec::Quadratic { m } => Some(m.len()),
            WeightSpec::LogCosh { b } => Some(b.len()),
        }
    }
}

pub(crate) fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub(crate) fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    pub weight: WeightSpec,
    pub p: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub functions: usize,
    pub pointwise_draws: usize,
    pub suites: Vec<Suite>,
    pub retry: bool,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let s = SuiteSettings::default();
        Self {
            model: ModelSource::Rotation { alpha: 0.5 },
            weight: WeightSpec::None,
            p: s.ps,
            samples: s.samples,
            seed: s.seed,
            functions: s.functions,
            pointwise_draws: s.pointwise_draws,
            suites: Suite::ALL.to_vec(),
            retry: s.retry,
            tolerances: s.tol,
        }
    }
}

impl ExperimentConfig {
    pub fn settings(&self) -> SuiteSettings {
        SuiteSettings {
            ps: self.p.clone(),
            samples: self.samples,
            seed: self.seed,
            functions: self.functions,
            pointwise_draws: self.pointwise_draws,
            tol: self.tolerances,
            retry: self.retry,
        }
    }

    pub fn measure(&self) -> crate::Result<WeightedMeasure> {
        let model = self.model.build()?;
        let w = self.weight.build(model.dim())?;
        WeightedMeasure::new(model, w)
    }
}

/// One problem found in a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.field, self.message),
            None => write!(f, "`{}`: {}", self.field, self.message),
        }
    }
}

/// Every problem found in a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<_> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Deserialize, Default)]
struct RawConfig {
    seed: Option<u64>,
    samples: Option<usize>,
    p: Option<Vec<f64>>,
    functions: Option<usize>,
    pointwise_draws: Option<usize>,
    suites: Option<Vec<String>>,
    retry: Option<bool>,
    model: Option<RawModel>,
    weight: Option<RawWeight>,
    tolerances: Option<Tolerances>,
}

#[derive(Deserialize, Default)]
struct RawModel {
    builtin: Option<String>,
    alpha: Option<f64>,
    dim: Option<usize>,
    seed: Option<u64>,
    drift: Option<Vec<f64>>,
    diffusion: Option<Vec<f64>>,
    a: Option<Vec<Vec<f64>>>,
    q: Option<Vec<Vec<f64>>>,
    wiener: Option<usize>,
}

#[derive(Deserialize, Default)]
struct RawWeight {
    kind: Option<String>,
    m: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
}

const TOP_KEYS: &[&str] = &[
    "seed",
    "samples",
    "p",
    "functions",
    "pointwise_draws",
    "suites",
    "retry",
    "model",
    "weight",
    "tolerances",
];
const MODEL_KEYS: &[&str] = &[
    "builtin",
    "alpha",
    "dim",
    "seed",
    "drift",
    "diffusion",
    "a",
    "q",
    "wiener",
];
const WEIGHT_KEYS: &[&str] = &["kind", "m", "b"];
const TOLERANCE_KEYS: &[&str] = &[
    "sigma",
    "drift_algebra",
    "pointwise_identity",
    "coercivity",
    "lyapunov_oracle",
    "field_of_values",
    "spectrum",
];

struct Collector<'a> {
    text: &'a str,
    issues: Vec<ConfigIssue>,
}

impl Collector<'_> {
    /// Line of `key = ...` inside `[section]` (top level for `None`).
    fn locate(&self, section: Option<&str>, key: &str) -> Option<usize> {
        let mut current: Option<String> = None;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                current = Some(line.trim_matches(|c| c == '[' || c == ']').trim().to_string());
                if section == Some(key) && current.as_deref() == Some(key) {
                    return Some(i + 1);
                }
                continue;
            }
            if current.as_deref() != section {
                continue;
            }
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
        None
    }

    fn push(&mut self, section: Option<&str>, key: &str, message: impl Into<String>) {
        let field = match section {
            Some(s) if s != key => format!("{s}.{key}"),
            _ => key.to_string(),
        };
        let line = self.locate(section, key);
        self.issues.push(ConfigIssue {
            line,
            field,
            message: message.into(),
        });
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut c = Collector {
        text,
        issues: Vec::new(),
    };
    let table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            let e: toml::de::Error = e;
            return Err(ConfigErrors(vec![ConfigIssue {
                line: e.span().map(|s| line_of(text, s.start)),
                field: "<document>".into(),
                message: e.message().to_string(),
            }]));
        }
    };
    check_keys(&mut c, &table);
    let raw: RawConfig = match toml::from_str(text) {
        Ok(r) => r,
        Err(e) => {
            if c.issues.is_empty() {
                c.issues.push(ConfigIssue {
                    line: e.span().map(|s| line_of(text, s.start)),
                    field: "<document>".into(),
                    message: e.message().to_string(),
                });
            }
            return Err(ConfigErrors(c.issues));
        }
    };
    let cfg = validate(&mut c, raw);
    if c.issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(c.issues))
    }
}

fn check_keys(c: &mut Collector, table: &toml::Table) {
    for (k, v) in table {
        if !TOP_KEYS.contains(&k.as_str()) {
            c.push(None, k, "unknown key");
            continue;
        }
        let (section, allowed) = match k.as_str() {
            "model" => ("model", MODEL_KEYS),
            "weight" => ("weight", WEIGHT_KEYS),
            "tolerances" => ("tolerances", TOLERANCE_KEYS),
            _ => continue,
        };
        if let Some(t) = v.as_table() {
            for key in t.keys() {
                if !allowed.contains(&key.as_str()) {
                    c.push(Some(section), key, "unknown key");
                }
            }
        }
    }
}

fn validate(c: &mut Collector, raw: RawConfig) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    if let Some(s) = raw.seed {
        cfg.seed = s;
    }
    if let Some(n) = raw.samples {
        if n < 100 {
            c.push(None, "samples", format!("at least 100 samples are needed, got {n}"));
        }
        cfg.samples = n;
    }
    if let Some(n) = raw.functions {
        if n == 0 {
            c.push(None, "functions", "must be positive");
        }
        cfg.functions = n;
    }
    if let Some(n) = raw.pointwise_draws {
        if n == 0 {
            c.push(None, "pointwise_draws", "must be positive");
        }
        cfg.pointwise_draws = n;
    }
    if let Some(r) = raw.retry {
        cfg.retry = r;
    }
    if let Some(p) = raw.p {
        if p.is_empty() {
            c.push(None, "p", "at least one exponent is needed");
        }
        for &x in &p {
            if !(x > 1.0 && x.is_finite()) {
                c.push(None, "p", format!("p must exceed 1 (got {x})"));
            }
        }
        cfg.p = p;
    }
    if let Some(names) = raw.suites {
        let mut set = BTreeSet::new();
        for n in names {
            match n.parse::<Suite>() {
                Ok(s) => {
                    set.insert(s);
                }
                Err(e) => c.push(None, "suites", e),
            }
        }
        cfg.suites = set.into_iter().collect();
    }
    if let Some(t) = raw.tolerances {
        let values = [
            ("sigma", t.sigma),
            ("drift_algebra", t.drift_algebra),
            ("pointwise_identity", t.pointwise_identity),
            ("coercivity", t.coercivity),
            ("lyapunov_oracle", t.lyapunov_oracle),
            ("field_of_values", t.field_of_values),
            ("spectrum", t.spectrum),
        ];
        for (k, v) in values {
            if !(v > 0.0 && v.is_finite()) {
                c.push(Some("tolerances"), k, format!("must be positive, got {v}"));
            }
        }
        cfg.tolerances = t;
    }
    let model = raw.model.map(|m| validate_model(c, m));
    if let Some(Some(m)) = &model {
        cfg.model = m.clone();
    }
    let is_wiener = matches!(cfg.model, ModelSource::Wiener { .. });
    let dim = match (&model, cfg.model.build()) {
        (Some(None), _) => None,
        (_, Ok(m)) => Some(m.dim()),
        (_, Err(e)) => {
            c.push(Some("model"), model_field(&cfg.model), e.to_string());
            None
        }
    };
    match raw.weight {
        Some(w) => {
            if let Some(spec) = validate_weight(c, w) {
                if let (Some(d), Some(wd)) = (dim, spec.dim()) {
                    if d != wd {
                        let key = if matches!(spec, WeightSpec::LogCosh { .. }) {
                            "b"
                        } else {
                            "m"
                        };
                        c.push(
                            Some("weight"),
                            key,
                            format!("weight has dimension {wd}, model has dimension {d}"),
                        );
                    }
                }
                if let (Some(d), WeightSpec::Quadratic { .. }) = (dim, &spec) {
                    if let Err(e) = spec.build(d) {
                        c.push(Some("weight"), "m", e.to_string());
                    }
                }
                cfg.weight = spec;
            }
        }
        None if is_wiener => {
            // `∫ f²` in mode coordinates
            if let Some(d) = dim {
                cfg.weight = WeightSpec::Quadratic {
                    m: from_matrix(&DMatrix::identity(d, d)),
                };
            }
        }
        None => {}
    }
    cfg
}

fn model_field(m: &ModelSource) -> &'static str {
    match m {
        ModelSource::Explicit { .. } => "a",
        ModelSource::Wiener { .. } => "wiener",
        _ => "builtin",
    }
}

fn validate_model(c: &mut Collector, m: RawModel) -> Option<ModelSource> {
    let s = Some("model");
    let sources = [m.builtin.is_some(), m.a.is_some() || m.q.is_some(), m.wiener.is_some()];
    if sources.iter().filter(|&&x| x).count() != 1 {
        c.push(
            s,
            "model",
            "exactly one of `builtin`, `a` with `q`, or `wiener` must be given",
        );
        return None;
    }
    let used = |c: &mut Collector, allowed: &[&str], what: &str| {
        let present = [
            ("alpha", m.alpha.is_some()),
            ("dim", m.dim.is_some()),
            ("seed", m.seed.is_some()),
            ("drift", m.drift.is_some()),
            ("diffusion", m.diffusion.is_some()),
        ];
        for (k, p) in present {
            if p && !allowed.contains(&k) {
                c.push(s, k, format!("does not apply to {what}"));
            }
        }
    };
    if let Some(n) = m.wiener {
        used(c, &[], "a `wiener` model");
        if n == 0 || n > MAX_PIPELINE_MODES {
            c.push(
                s,
                "wiener",
                format!("mode count must be in 1..={MAX_PIPELINE_MODES}, got {n}"),
            );
            return None;
        }
        return Some(ModelSource::Wiener { modes: n });
    }
    if m.a.is_some() || m.q.is_some() {
        used(c, &[], "an explicit model");
        let (Some(a), Some(q)) = (m.a, m.q) else {
            c.push(s, "a", "`a` and `q` must be given together");
            return None;
        };
        let mut ok = true;
        for (key, rows) in [("a", &a), ("q", &q)] {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                c.push(
                    s,
                    key,
                    format!(
                        "must be a square matrix, got {n} rows of lengths {:?}",
                        rows.iter().map(Vec::len).collect::<Vec<_>>()
                    ),
                );
                ok = false;
            }
        }
        if ok && a.len() != q.len() {
            c.push(
                s,
                "q",
                format!("dimension {} does not match `a` (dimension {})", q.len(), a.len()),
            );
            ok = false;
        }
        return ok.then_some(ModelSource::Explicit { a, q });
    }
    let name = m.builtin.unwrap_or_default();
    let src = match name.as_str() {
        "rotation" => {
            used(c, &["alpha"], "builtin `rotation`");
            ModelSource::Rotation {
                alpha: m.alpha.unwrap_or(0.0),
            }
        }
        "isotropic" => {
            used(c, &["dim"], "builtin `isotropic`");
            ModelSource::Isotropic {
                dim: m.dim.unwrap_or(2),
            }
        }
        "nonnormal" => {
            used(c, &[], "builtin `nonnormal`");
            ModelSource::Nonnormal
        }
        "diagonal" => {
            used(c, &["drift", "diffusion"], "builtin `diagonal`");
            let (Some(drift), Some(diffusion)) = (m.drift, m.diffusion) else {
                c.push(s, "builtin", "`diagonal` needs `drift` and `diffusion`");
                return None;
            };
            if drift.len() != diffusion.len() {
                c.push(
                    s,
                    "diffusion",
                    format!(
                        "length {} does not match `drift` (length {})",
                        diffusion.len(),
                        drift.len()
                    ),
                );
                return None;
            }
            ModelSource::Diagonal { drift, diffusion }
        }
        "random" => {
            used(c, &["dim", "seed"], "builtin `random`");
            ModelSource::Random {
                dim: m.dim.unwrap_or(3),
                seed: m.seed.unwrap_or(0),
            }
        }
        other => {
            c.push(
                s,
                "builtin",
                format!("unknown builtin `{other}` (expected rotation, isotropic, nonnormal, diagonal or random)"),
            );
            return None;
        }
    };
    if let ModelSource::Isotropic { dim: 0 } | ModelSource::Random { dim: 0, .. } = src {
        c.push(s, "dim", "must be positive");
        return None;
    }
    Some(src)
}

fn validate_weight(c: &mut Collector, w: RawWeight) -> Option<WeightSpec> {
    let s = Some("weight");
    match w.kind.as_deref().unwrap_or("none") {
        "none" => {
            if w.m.is_some() || w.b.is_some() {
                c.push(s, "kind", "`none` takes no parameters");
            }
            Some(WeightSpec::None)
        }
        "quadratic" => {
            let Some(m) = w.m else {
                c.push(s, "kind", "`quadratic` needs `m`");
                return None;
            };
            let n = m.len();
            if n == 0 || m.iter().any(|r| r.len() != n) {
                c.push(s, "m", "must be a square matrix");
                return None;
            }
            Some(WeightSpec::Quadratic { m })
        }
        "logcosh" => match w.b {
            Some(b) if !b.is_empty() => Some(WeightSpec::LogCosh { b }),
            _ => {
                c.push(s, "kind", "`logcosh` needs a nonempty `b`");
                None
            }
        },
        other => {
            c.push(
                s,
                "kind",
                format!("unknown weight `{other}` (expected none, quadratic or logcosh)"),
            );
            None
        }
    }
}
