//! Trains `seeds` restarts of the language model on the ingested corpus and
//! writes one checkpoint plus a training log per seed.

use crate::commands::{load_trees, load_vocab};
use crate::config::Settings;
use crate::layout::{write_atomic, RunPaths};
use crate::manifest::{checksum_map, sha256_bytes, RunManifest, StageRecord};
use anyhow::{Context, Result};
use onlab_core::model::ModelConfig;
use onlab_core::training::run_restarts;
use onlab_core::treebank::{CorpusSplit, SplitName};
use std::path::PathBuf;

pub struct TrainArgs {
    pub seeds: usize,
    pub base_seed: u64,
    pub settings: Settings,
}

pub fn run(paths: &RunPaths, args: &TrainArgs) -> Result<()> {
    let vocab = load_vocab(paths).context("run `ingest` first")?;
    let train_trees = load_trees(&paths.trees("train"))?;
    let dev_trees = load_trees(&paths.trees("dev"))?;

    let mut manifest = RunManifest::load(&paths.manifest())?;
    let inputs = checksum_map(
        &paths.run_dir,
        &[paths.trees("train"), paths.trees("dev"), paths.vocab()],
    )?;
    let config_text = args.settings.dump();
    let params = sha256_bytes(
        format!("train v1 seeds={} base={}\n{config_text}", args.seeds, args.base_seed)
            .as_bytes(),
    );
    if manifest.up_to_date("train", &params, &inputs, &paths.run_dir) {
        println!("train: up to date");
        return Ok(());
    }

    let model_config =
        ModelConfig { vocab_size: vocab.len(), ..args.settings.model.clone() };
    model_config.validate()?;
    args.settings.train.validate()?;

    let train_split = CorpusSplit::from_trees(SplitName::Train, train_trees, &vocab);
    let dev_split = CorpusSplit::from_trees(SplitName::Dev, dev_trees, &vocab);

    write_atomic(&paths.config_snapshot(), config_text.as_bytes())?;

    let results = run_restarts(
        args.seeds,
        args.base_seed,
        &train_split,
        &dev_split,
        &vocab,
        &model_config,
        &args.settings.train,
    );

    let mut outputs: Vec<PathBuf> = vec![paths.config_snapshot()];
    let mut first_error: Option<onlab_core::Error> = None;
    for (seed, result) in results {
        match result {
            Ok((checkpoint, log)) => {
                let ckpt_path = paths.checkpoint(seed);
                std::fs::create_dir_all(paths.checkpoints_dir())?;
                checkpoint.save(&ckpt_path)?;
                let log_path = paths.train_log(seed);
                write_atomic(&log_path, log.to_tsv().as_bytes())?;
                println!(
                    "train: seed {seed}: dev perplexity {:.3}{}",
                    checkpoint.val_perplexity,
                    if log.diverged { " (diverged; best epoch kept)" } else { "" }
                );
                outputs.push(ckpt_path);
                outputs.push(log_path);
            }
            Err(e) => {
                eprintln!("train: seed {seed} failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        return Err(e.into());
    }

    manifest.record(
        "train",
        StageRecord { params, inputs, outputs: checksum_map(&paths.run_dir, &outputs)? },
    );
    manifest.save(&paths.manifest())?;
    Ok(())
}
