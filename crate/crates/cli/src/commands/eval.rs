//! Scores parse files against the gold split and writes the report:
//! unlabeled span F1 with restart statistics and self-F1, per-label span
//! accuracy against the random baseline, and the subordinate-clause split
//! case study.

use crate::commands::{load_heights, load_parses, load_trees, split_label};
use crate::config::EvalSettings;
use crate::layout::RunPaths;
use crate::manifest::{checksum_map, sha256_bytes, RunManifest, StageRecord};
use anyhow::{bail, Context, Result};
use onlab_core::evaluation::{
    corpus_f1, gold_heights, label_accuracy, sample_sbars, sbar_case_study, self_f1,
    write_report, Aggregation, Conventions, EvalReport, Table1Row, Table3Row,
};
use onlab_core::induction::BinaryParse;
use onlab_core::treebank::GoldTree;
use std::path::PathBuf;

pub struct EvalArgs {
    pub split: String,
    pub wsj10: bool,
    pub layer: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub settings: EvalSettings,
}

fn ensemble_row(
    model: String,
    dataset: String,
    restarts: &[Vec<BinaryParse>],
    golds: &[GoldTree],
    conv: &Conventions,
    agg: Aggregation,
) -> Result<Table1Row> {
    let f1_per_restart: Vec<f64> = restarts
        .iter()
        .map(|p| corpus_f1(p, golds, conv, agg).map(|r| 100.0 * r.f1))
        .collect::<onlab_core::Result<_>>()?;
    let n = f1_per_restart.len() as f64;
    let mean = f1_per_restart.iter().sum::<f64>() / n;
    let var = f1_per_restart.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    // A single restart is vacuously self-consistent.
    let sf1 = if restarts.len() < 2 { 1.0 } else { self_f1(restarts, conv, agg)? };
    Ok(Table1Row {
        model,
        dataset,
        f1_per_restart,
        f1_mean: mean,
        f1_sd: var.sqrt(),
        self_f1: 100.0 * sf1,
    })
}

pub fn run(paths: &RunPaths, args: &EvalArgs) -> Result<()> {
    let label = split_label(&args.split, args.wsj10);
    let golds = load_trees(&paths.trees(&label))
        .with_context(|| format!("split `{label}` (run `ingest` first)"))?;

    let seeds: Vec<u64> = (0..args.seeds as u64).map(|k| args.base_seed + k).collect();
    let mut input_files: Vec<PathBuf> = vec![paths.trees(&label)];
    for &s in &seeds {
        input_files.push(paths.parse_file(&label, s, args.layer));
        input_files.push(paths.heights_file(&label, s, args.layer));
        input_files.push(paths.random_parse_file(&label, s));
    }
    let mut manifest = RunManifest::load(&paths.manifest())?;
    let inputs = checksum_map(&paths.run_dir, &input_files)
        .context("parse files missing (run `parse`, with and without --baseline random)")?;
    let stage = format!("eval:{label}:layer{}", args.layer);
    let params = sha256_bytes(
        format!(
            "eval v1 split={label} layer={} seeds={:?} min_count={} sbar={}@{} micro={}",
            args.layer,
            seeds,
            args.settings.min_count,
            args.settings.sbar_sample,
            args.settings.sbar_seed,
            args.settings.micro
        )
        .as_bytes(),
    );
    if manifest.up_to_date(&stage, &params, &inputs, &paths.run_dir) {
        println!("eval: {stage}: up to date");
        return Ok(());
    }

    let mut model_parses: Vec<Vec<BinaryParse>> = Vec::new();
    let mut model_heights: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut random_parses: Vec<Vec<BinaryParse>> = Vec::new();
    for &s in &seeds {
        let p = load_parses(&paths.parse_file(&label, s, args.layer))?;
        let h = load_heights(&paths.heights_file(&label, s, args.layer))?;
        let r = load_parses(&paths.random_parse_file(&label, s))?;
        for (name, len) in [("parse", p.len()), ("heights", h.len()), ("random", r.len())] {
            if len != golds.len() {
                bail!(
                    "seed {s}: {name} file has {len} sentences, gold split has {}",
                    golds.len()
                );
            }
        }
        model_parses.push(p);
        model_heights.push(h);
        random_parses.push(r);
    }

    let conv = Conventions::default();
    let agg = if args.settings.micro { Aggregation::Micro } else { Aggregation::Macro };

    let table1 = vec![
        ensemble_row(
            format!("onlstm-layer{}", args.layer),
            label.clone(),
            &model_parses,
            &golds,
            &conv,
            agg,
        )?,
        ensemble_row("random".into(), label.clone(), &random_parses, &golds, &conv, agg)?,
    ];

    let table2 = label_accuracy(&model_parses, &random_parses, &golds, args.settings.min_count)?;

    let sample = sample_sbars(&golds, args.settings.sbar_sample, args.settings.sbar_seed);
    let mut table3 = Vec::new();
    if !sample.is_empty() {
        for (i, heights) in model_heights.iter().enumerate() {
            let counts = sbar_case_study(heights, &golds, &sample)?;
            table3.push(Table3Row::from_counts(
                format!("onlstm-layer{}-seed{}", args.layer, seeds[i]),
                &counts,
            ));
        }
        let gold_h: Vec<Vec<f64>> = golds.iter().map(gold_heights).collect();
        let counts = sbar_case_study(&gold_h, &golds, &sample)?;
        table3.push(Table3Row::from_counts("gold", &counts));
    }

    let report = EvalReport { table1, table2, table3 };
    write_report(&paths.eval_dir(), &report)?;
    println!(
        "eval: {stage}: F1 {:.2} (self-F1 {:.2}) vs random {:.2}",
        report.table1[0].f1_mean, report.table1[0].self_f1, report.table1[1].f1_mean
    );

    let outputs: Vec<PathBuf> = ["report.json", "table1.tsv", "table2.tsv", "table3.tsv"]
        .iter()
        .map(|f| paths.eval_dir().join(f))
        .collect();
    manifest.record(
        &stage,
        StageRecord { params, inputs, outputs: checksum_map(&paths.run_dir, &outputs)? },
    );
    manifest.save(&paths.manifest())?;
    Ok(())
}
