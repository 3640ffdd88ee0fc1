//! Reproducibility ledger for a run: every stage records a fingerprint of
//! its parameters plus checksums of the files it read and wrote. A stage
//! whose fingerprint, inputs, and outputs are all unchanged is skipped.

use crate::layout::write_atomic;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct StageRecord {
    /// Hash of the stage's resolved parameters.
    pub params: String,
    /// Path (relative to the run directory) -> sha256 of file contents.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RunManifest {
    pub tool_version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest> {
        if !path.exists() {
            return Ok(RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                stages: BTreeMap::new(),
            });
        }
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        write_atomic(path, json.as_bytes())
    }

    /// True when the stage was recorded with the same parameters, the same
    /// input checksums, and all recorded outputs still on disk unchanged.
    pub fn up_to_date(&self, stage: &str, params_hash: &str, inputs: &BTreeMap<String, String>, run_dir: &Path) -> bool {
        let Some(rec) = self.stages.get(stage) else {
            return false;
        };
        if rec.params != params_hash || &rec.inputs != inputs {
            return false;
        }
        rec.outputs.iter().all(|(rel, want)| {
            let p = run_dir.join(rel);
            matches!(sha256_file(&p), Ok(got) if &got == want)
        })
    }

    pub fn record(&mut self, stage: &str, rec: StageRecord) {
        self.stages.insert(stage.to_string(), rec);
    }
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_bytes(&bytes))
}

/// Checksums of files keyed by their path relative to `run_dir`; files
/// outside the run directory are keyed by their absolute path.
pub fn checksum_map(run_dir: &Path, files: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for f in files {
        let key = f
            .strip_prefix(run_dir)
            .map(|p| p.to_string_lossy().into_owned())
            .unwrap_or_else(|_| f.to_string_lossy().into_owned());
        out.insert(key, sha256_file(f)?);
    }
    Ok(out)
}
