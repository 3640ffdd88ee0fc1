//! Materializes the bundled synthetic PCFG corpus as a flat corpus directory
//! (`train.txt` / `dev.txt` / `test.txt`, one bracketed tree per line) that
//! `ingest` consumes like any other treebank.

use crate::commands::render_trees;
use crate::layout::write_atomic;
use anyhow::{bail, Result};
use onlab_core::synth::generate_corpus;
use std::path::Path;

pub fn run(out: &Path, sentences: usize, seed: u64) -> Result<()> {
    if sentences < 10 {
        bail!("need at least 10 sentences to carve out dev and test splits");
    }
    let corpus = generate_corpus(sentences, seed);
    // 80/10/10 split over the generation order.
    let n_dev = sentences / 10;
    let n_test = sentences / 10;
    let n_train = sentences - n_dev - n_test;
    let (train, rest) = corpus.split_at(n_train);
    let (dev, test) = rest.split_at(n_dev);

    write_atomic(&out.join("train.txt"), render_trees(train).as_bytes())?;
    write_atomic(&out.join("dev.txt"), render_trees(dev).as_bytes())?;
    write_atomic(&out.join("test.txt"), render_trees(test).as_bytes())?;
    println!(
        "synth: wrote {} train / {} dev / {} test sentences to {}",
        train.len(),
        dev.len(),
        test.len(),
        out.display()
    );
    Ok(())
}
