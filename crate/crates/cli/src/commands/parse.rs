//! Parses a split with trained checkpoints (per-layer split-point heights)
//! or with the model-free random baseline. One parse file per seed; model
//! parses also emit the raw height vectors.

use crate::commands::{load_trees, render_heights, render_parses, split_label};
use crate::layout::{write_atomic, RunPaths};
use crate::manifest::{checksum_map, sha256_bytes, RunManifest, StageRecord};
use anyhow::{Context, Result};
use onlab_core::induction::{parse_corpus_with_heights, random_parse};
use onlab_core::model::Checkpoint;
use onlab_core::treebank::{CorpusSplit, SplitName};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

pub struct ParseArgs {
    pub split: String,
    pub wsj10: bool,
    pub layer: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub random_baseline: bool,
}

pub fn run(paths: &RunPaths, args: &ParseArgs) -> Result<()> {
    let label = split_label(&args.split, args.wsj10);
    let trees_path = paths.trees(&label);
    let golds = load_trees(&trees_path)
        .with_context(|| format!("split `{label}` (run `ingest` first)"))?;

    let mut manifest = RunManifest::load(&paths.manifest())?;
    let stage = if args.random_baseline {
        format!("parse:{label}:random")
    } else {
        format!("parse:{label}:layer{}", args.layer)
    };

    let mut input_files: Vec<PathBuf> = vec![trees_path];
    if !args.random_baseline {
        for k in 0..args.seeds as u64 {
            input_files.push(paths.checkpoint(args.base_seed + k));
        }
    }
    let inputs = checksum_map(&paths.run_dir, &input_files)
        .context("checkpoint missing (run `train` first)")?;
    let params = sha256_bytes(
        format!(
            "parse v1 split={label} layer={} seeds={} base={} random={}",
            args.layer, args.seeds, args.base_seed, args.random_baseline
        )
        .as_bytes(),
    );
    if manifest.up_to_date(&stage, &params, &inputs, &paths.run_dir) {
        println!("parse: {stage}: up to date");
        return Ok(());
    }

    let mut outputs = Vec::new();
    for k in 0..args.seeds as u64 {
        let seed = args.base_seed + k;
        if args.random_baseline {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let parses: Vec<_> =
                golds.iter().map(|g| random_parse(g.len(), &mut rng)).collect();
            let path = paths.random_parse_file(&label, seed);
            write_atomic(&path, render_parses(&parses, &golds)?.as_bytes())?;
            outputs.push(path);
        } else {
            let checkpoint = Checkpoint::load(&paths.checkpoint(seed))?;
            let split =
                CorpusSplit::from_trees(SplitName::Test, golds.clone(), &checkpoint.vocab);
            let parsed = parse_corpus_with_heights(&checkpoint, &split, args.layer)?;
            let (parses, heights): (Vec<_>, Vec<_>) = parsed.into_iter().unzip();
            let parse_path = paths.parse_file(&label, seed, args.layer);
            write_atomic(&parse_path, render_parses(&parses, &golds)?.as_bytes())?;
            let heights_path = paths.heights_file(&label, seed, args.layer);
            write_atomic(&heights_path, render_heights(&heights).as_bytes())?;
            outputs.push(parse_path);
            outputs.push(heights_path);
        }
    }
    println!("parse: {stage}: {} sentences x {} seeds", golds.len(), args.seeds);

    manifest.record(
        &stage,
        StageRecord { params, inputs, outputs: checksum_map(&paths.run_dir, &outputs)? },
    );
    manifest.save(&paths.manifest())?;
    Ok(())
}
