use crate::error::Result;
use crate::evaluation::{LabelAccuracyRow, SbarCaseCounts};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// F1 statistics of one parser configuration on one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table1Row {
    pub model: String,
    pub dataset: String,
    pub f1_per_restart: Vec<f64>,
    pub f1_mean: f64,
    pub f1_sd: f64,
    pub self_f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table3Row {
    pub model: String,
    pub verb_pct: f64,
    pub border_pct: f64,
    pub other_pct: f64,
}

impl Table3Row {
    pub fn from_counts(model: impl Into<String>, c: &SbarCaseCounts) -> Self {
        Table3Row {
            model: model.into(),
            verb_pct: c.verb,
            border_pct: c.border,
            other_pct: c.other,
        }
    }
}

/// Per-restart F1 list with ensemble statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub f1_per_restart: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub self_f1: f64,
}

impl EnsembleReport {
    pub fn new(f1_per_restart: Vec<f64>, self_f1: f64) -> Self {
        let n = f1_per_restart.len() as f64;
        let mean = f1_per_restart.iter().sum::<f64>() / n;
        let var = f1_per_restart.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        EnsembleReport { f1_per_restart, mean, sd: var.sqrt(), self_f1 }
    }
}

/// The full machine-readable evaluation output.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct EvalReport {
    pub table1: Vec<Table1Row>,
    pub table2: Vec<LabelAccuracyRow>,
    pub table3: Vec<Table3Row>,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

pub fn table1_tsv(rows: &[Table1Row]) -> String {
    let mut out = String::from("model\tdataset\tf1\tsd\tself_f1\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.model,
            r.dataset,
            fmt(r.f1_mean),
            fmt(r.f1_sd),
            fmt(r.self_f1)
        ));
    }
    out
}

pub fn table2_tsv(rows: &[LabelAccuracyRow]) -> String {
    let mut out = String::from("constituent\taccuracy\tsd\trandom\trandom_sd\tdelta_acc\toccurrences\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.label,
            fmt(r.accuracy),
            fmt(r.accuracy_sd),
            fmt(r.baseline),
            fmt(r.baseline_sd),
            fmt(r.delta),
            r.occurrences
        ));
    }
    out
}

pub fn table3_tsv(rows: &[Table3Row]) -> String {
    let mut out = String::from("model\tcase1_verb\tcase2_border\tcase3_other\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.model,
            fmt(r.verb_pct),
            fmt(r.border_pct),
            fmt(r.other_pct)
        ));
    }
    out
}

/// Write report.json plus the three human-readable TSV tables.
pub fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report)?;
    write_atomic(&dir.join("report.json"), json.as_bytes())?;
    write_atomic(&dir.join("table1.tsv"), table1_tsv(&report.table1).as_bytes())?;
    write_atomic(&dir.join("table2.tsv"), table2_tsv(&report.table2).as_bytes())?;
    write_atomic(&dir.join("table3.tsv"), table3_tsv(&report.table3).as_bytes())?;
    Ok(())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_label_table_is_header_only() {
        let tsv = table2_tsv(&[]);
        assert_eq!(tsv.lines().count(), 1);
        assert!(tsv.starts_with("constituent\t"));
    }

    #[test]
    fn ensemble_stats() {
        let e = EnsembleReport::new(vec![40.0, 50.0, 60.0], 70.0);
        assert!((e.mean - 50.0).abs() < 1e-12);
        assert!((e.sd - (200.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(e.self_f1, 70.0);
    }

    #[test]
    fn report_files_written() {
        let dir = tempfile::tempdir().unwrap();
        let report = EvalReport::default();
        write_report(dir.path(), &report).unwrap();
        for f in ["report.json", "table1.tsv", "table2.tsv", "table3.tsv"] {
            assert!(dir.path().join(f).exists(), "{f} missing");
        }
    }
}
