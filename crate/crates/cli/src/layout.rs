//! On-disk layout of a run directory and atomic file writes.
//!
//! ```text
//! <data root>/<run>/
//!   manifest.json
//!   config.txt                     resolved settings snapshot
//!   corpus/<split>.trees           normalized trees, one per line
//!   corpus/vocab.tsv
//!   checkpoints/<run>.seed<k>.ckpt (+ .log.tsv)
//!   parses/<split>.seed<k>.layer<l>.parse / .heights
//!   parses/<split>.seed<k>.random.parse / .heights
//!   eval/report.json + table{1,2,3}.tsv
//! ```

use anyhow::{Context, Result};
use std::path::{Path, PathBuf};

/// Environment variable selecting where run outputs live.
pub const DATA_DIR_ENV: &str = "ONLAB_DATA_DIR";

pub fn data_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_ENV) {
        Some(v) => PathBuf::from(v),
        None => PathBuf::from("onlab-data"),
    }
}

#[derive(Debug, Clone)]
pub struct RunPaths {
    pub run_name: String,
    pub run_dir: PathBuf,
}

impl RunPaths {
    pub fn new(root: &Path, run_name: &str) -> RunPaths {
        RunPaths { run_name: run_name.to_string(), run_dir: root.join(run_name) }
    }

    pub fn manifest(&self) -> PathBuf {
        self.run_dir.join("manifest.json")
    }

    pub fn config_snapshot(&self) -> PathBuf {
        self.run_dir.join("config.txt")
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.run_dir.join("corpus")
    }

    pub fn trees(&self, split: &str) -> PathBuf {
        self.corpus_dir().join(format!("{split}.trees"))
    }

    pub fn vocab(&self) -> PathBuf {
        self.corpus_dir().join("vocab.tsv")
    }

    pub fn checkpoints_dir(&self) -> PathBuf {
        self.run_dir.join("checkpoints")
    }

    pub fn checkpoint(&self, seed: u64) -> PathBuf {
        self.checkpoints_dir().join(format!("{}.seed{}.ckpt", self.run_name, seed))
    }

    pub fn train_log(&self, seed: u64) -> PathBuf {
        self.checkpoints_dir().join(format!("{}.seed{}.log.tsv", self.run_name, seed))
    }

    pub fn parses_dir(&self) -> PathBuf {
        self.run_dir.join("parses")
    }

    pub fn parse_file(&self, split: &str, seed: u64, layer: usize) -> PathBuf {
        self.parses_dir().join(format!("{split}.seed{seed}.layer{layer}.parse"))
    }

    pub fn heights_file(&self, split: &str, seed: u64, layer: usize) -> PathBuf {
        self.parses_dir().join(format!("{split}.seed{seed}.layer{layer}.heights"))
    }

    pub fn random_parse_file(&self, split: &str, seed: u64) -> PathBuf {
        self.parses_dir().join(format!("{split}.seed{seed}.random.parse"))
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.run_dir.join("eval")
    }
}

/// Write via a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().context("path has no parent directory")?;
    std::fs::create_dir_all(dir)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
