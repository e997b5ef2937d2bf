//! Append-only run store: `runs/<config hash>-<seq>.json` plus an
//! `index.jsonl` line per stored run.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{RunReport, RunnerError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub config_hash: String,
    pub seq: usize,
    pub file: String,
    pub seed: u64,
    pub passed: bool,
    pub tool_version: String,
}

#[derive(Clone, Debug)]
pub struct StoredRun {
    pub path: PathBuf,
    pub seq: usize,
}

pub struct RunStore {
    root: PathBuf,
}

fn io(path: &Path, source: std::io::Error) -> RunnerError {
    RunnerError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl RunStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, RunnerError> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| io(&root, e))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.jsonl")
    }

    /// Stores the report under the next free sequence number; existing
    /// files are never overwritten.
    pub fn save(&self, report: &RunReport) -> Result<StoredRun, RunnerError> {
        let json = serde_json::to_string_pretty(report).map_err(|e| RunnerError::Serialization(e.to_string()))?;
        let mut seq = 0;
        let (path, mut file) = loop {
            let name = format!("{}-{seq}.json", report.config_hash);
            let path = self.root.join(&name);
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(f) => break (path, f),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => seq += 1,
                Err(e) => return Err(io(&path, e)),
            }
        };
        file.write_all(json.as_bytes()).map_err(|e| io(&path, e))?;
        let entry = IndexEntry {
            config_hash: report.config_hash.clone(),
            seq,
            file: path.file_name().unwrap().to_string_lossy().into_owned(),
            seed: report.config.seed,
            passed: report.passed,
            tool_version: report.tool_version.clone(),
        };
        let index = self.index_path();
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&index)
            .map_err(|e| io(&index, e))?;
        let line = serde_json::to_string(&entry).map_err(|e| RunnerError::Serialization(e.to_string()))?;
        writeln!(f, "{line}").map_err(|e| io(&index, e))?;
        Ok(StoredRun { path, seq })
    }

    pub fn index(&self) -> Result<Vec<IndexEntry>, RunnerError> {
        let path = self.index_path();
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(vec![]),
            Err(e) => return Err(io(&path, e)),
        };
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| RunnerError::Serialization(e.to_string())))
            .collect()
    }

    /// Past runs of the configuration with this hash.
    pub fn runs_for(&self, hash: &str) -> Result<Vec<IndexEntry>, RunnerError> {
        Ok(self.index()?.into_iter().filter(|e| e.config_hash == hash).collect())
    }

    pub fn load(&self, entry: &IndexEntry) -> Result<RunReport, RunnerError> {
        let path = self.root.join(&entry.file);
        let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| RunnerError::Serialization(e.to_string()))
    }
}
