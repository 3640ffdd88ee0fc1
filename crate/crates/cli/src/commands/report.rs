//! Prints the evaluation tables from `eval/report.json` to stdout.

use crate::layout::{read_to_string, RunPaths};
use anyhow::{Context, Result};
use onlab_core::evaluation::{table1_tsv, table2_tsv, table3_tsv, EvalReport};
use std::io::Write;

pub fn run(paths: &RunPaths) -> Result<()> {
    let text = read_to_string(&paths.eval_dir().join("report.json"))
        .context("no evaluation report found (run `eval` first)")?;
    let report: EvalReport = serde_json::from_str(&text).context("parsing report.json")?;
    let mut out = std::io::stdout().lock();
    // A closed pipe (e.g. `onlab report | head`) is not an error.
    let _ = write!(
        out,
        "# parsing F1\n{}\n# per-label span accuracy\n{}\n# subordinate-clause split cases\n{}\n",
        table1_tsv(&report.table1),
        table2_tsv(&report.table2),
        table3_tsv(&report.table3),
    );
    Ok(())
}
