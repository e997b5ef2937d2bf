//! Structured outcome of a single verification.
//!
//! A [`CheckReport`] is either a leaf (one statistic compared against one
//! bound) or an aggregate whose verdict is the conjunction of its children.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::measure::McEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Passes iff `statistic <= bound`.
    AtMost,
    /// Passes iff `statistic >= bound`.
    AtLeast,
    /// Passes iff every child passes.
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub relation: Relation,
    pub statistic: f64,
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CheckReport>,
}

impl CheckReport {
    fn leaf(name: impl Into<String>, relation: Relation, statistic: f64, bound: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => statistic <= bound,
            Relation::AtLeast => statistic >= bound,
            Relation::All => unreachable!(),
        };
        Self {
            name: name.into(),
            passed,
            relation,
            statistic,
            bound,
            std_error: None,
            n_samples: None,
            seed: None,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, bound: f64) -> Self {
        Self::leaf(name, Relation::AtMost, statistic, bound)
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, bound: f64) -> Self {
        Self::leaf(name, Relation::AtLeast, statistic, bound)
    }

    /// Aggregate report; `statistic` counts failing children.
    pub fn all(name: impl Into<String>, children: Vec<CheckReport>) -> Self {
        let failures = children.iter().filter(|c| !c.passed).count();
        Self {
            name: name.into(),
            passed: failures == 0,
            relation: Relation::All,
            statistic: failures as f64,
            bound: 0.0,
            std_error: None,
            n_samples: None,
            seed: None,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            children,
        }
    }

    /// Statistical agreement: `|est.mean| ≤ sigma·se + 1e-12·scale`, where the
    /// absolute term only absorbs round-off for identities that are exact on
    /// the shared samples.
    pub fn within_sigma(name: impl Into<String>, est: &McEstimate, sigma: f64, scale: f64) -> Self {
        Self::at_most(name, est.mean.abs(), sigma * est.std_error + 1e-12 * scale)
            .with_std_error(est.std_error)
            .with_samples(est.n_samples, est.seed)
            .metric("sigma", sigma)
            .metric("difference", est.mean)
    }

    /// A check that could not be evaluated.
    pub fn errored(name: impl Into<String>, err: &crate::Error) -> Self {
        let mut r = Self::at_most(name, 1.0, 0.0);
        r.notes.push(format!("not evaluated: {err}"));
        r
    }

    pub fn with_std_error(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    pub fn with_samples(mut self, n: usize, seed: u64) -> Self {
        self.n_samples = Some(n);
        self.seed = Some(seed);
        self
    }

    pub fn metric(mut self, key: impl Into<String>, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Number of report nodes, this one included.
    pub fn count(&self) -> usize {
        1 + self.children.iter().map(CheckReport::count).sum::<usize>()
    }

    /// Depth-first walk yielding `(path, node)`.
    pub fn walk(&self) -> Vec<(String, &CheckReport)> {
        let mut out = Vec::new();
        self.walk_into(String::new(), &mut out);
        out
    }

    fn walk_into<'a>(&'a self, prefix: String, out: &mut Vec<(String, &'a CheckReport)>) {
        let path = if prefix.is_empty() {
            self.name.clone()
        } else {
            format!("{prefix}/{}", self.name)
        };
        out.push((path.clone(), self));
        for c in &self.children {
            c.walk_into(path.clone(), out);
        }
    }

    /// Names (full paths) of failing leaves.
    pub fn failures(&self) -> Vec<String> {
        self.walk()
            .into_iter()
            .filter(|(_, c)| !c.passed && c.children.is_empty())
            .map(|(p, _)| p)
            .collect()
    }
}
