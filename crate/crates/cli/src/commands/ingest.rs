//! Reads a raw treebank, normalizes it, builds the vocabulary, and lays the
//! splits down in the run directory. Accepts two layouts:
//!
//! * flat: `train.txt` / `dev.txt` / `test.txt` in one directory;
//! * ptb: numbered section directories (`00`..`24`) of `.mrg` files, mapped
//!   to train = 00-21, dev = 22, test = 23.

use crate::commands::render_trees;
use crate::layout::{write_atomic, RunPaths};
use crate::manifest::{checksum_map, sha256_bytes, RunManifest, StageRecord};
use anyhow::{bail, Context, Result};
use onlab_core::treebank::{
    normalize_tree, parse_ptb, GoldTree, NormalizationPolicy, Vocabulary,
};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Auto,
    Flat,
    Ptb,
}

pub struct IngestArgs {
    pub corpus: PathBuf,
    pub format: CorpusFormat,
    pub max_vocab: usize,
    pub min_freq: u64,
    pub keep_punctuation: bool,
    pub keep_label_suffixes: bool,
}

const PTB_TRAIN_SECTIONS: std::ops::RangeInclusive<usize> = 0..=21;
const PTB_DEV_SECTION: usize = 22;
const PTB_TEST_SECTION: usize = 23;

fn detect_format(dir: &Path) -> Result<CorpusFormat> {
    if dir.join("train.txt").exists() {
        return Ok(CorpusFormat::Flat);
    }
    if dir.join("00").is_dir() || dir.join("wsj").join("00").is_dir() {
        return Ok(CorpusFormat::Ptb);
    }
    bail!(
        "cannot detect corpus layout in {}: expected train.txt/dev.txt/test.txt \
         or numbered PTB section directories",
        dir.display()
    )
}

fn flat_sources(dir: &Path) -> Result<[(String, Vec<PathBuf>); 3]> {
    let mut missing = Vec::new();
    let mut out = Vec::new();
    for split in ["train", "dev", "test"] {
        let p = dir.join(format!("{split}.txt"));
        if p.exists() {
            out.push((split.to_string(), vec![p]));
        } else {
            missing.push(p.display().to_string());
        }
    }
    if !missing.is_empty() {
        bail!("missing corpus files: {}", missing.join(", "));
    }
    Ok(out.try_into().unwrap())
}

fn ptb_sources(dir: &Path) -> Result<[(String, Vec<PathBuf>); 3]> {
    let root = if dir.join("wsj").is_dir() { dir.join("wsj") } else { dir.to_path_buf() };
    let section_dir = |s: usize| root.join(format!("{s:02}"));
    let mut missing = Vec::new();
    let mut section_files = |s: usize| -> Vec<PathBuf> {
        let d = section_dir(s);
        if !d.is_dir() {
            missing.push(d.display().to_string());
            return Vec::new();
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(&d)
            .into_iter()
            .flatten()
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "mrg"))
            .collect();
        files.sort();
        files
    };
    let train: Vec<PathBuf> = PTB_TRAIN_SECTIONS.flat_map(&mut section_files).collect();
    let dev = section_files(PTB_DEV_SECTION);
    let test = section_files(PTB_TEST_SECTION);
    if !missing.is_empty() {
        bail!("missing PTB sections: {}", missing.join(", "));
    }
    Ok([("train".into(), train), ("dev".into(), dev), ("test".into(), test)])
}

fn read_split(files: &[PathBuf], policy: &NormalizationPolicy) -> Result<(Vec<GoldTree>, usize)> {
    let mut trees = Vec::new();
    let mut dropped = 0usize;
    for f in files {
        let text = std::fs::read_to_string(f)
            .with_context(|| format!("reading {}", f.display()))?;
        let raw = parse_ptb(&text).with_context(|| format!("parsing {}", f.display()))?;
        for t in raw {
            match normalize_tree(&t, policy) {
                Ok(n) => trees.push(n),
                // Sentences that are nothing but traces/punctuation vanish
                // under normalization; they carry no parseable content.
                Err(onlab_core::Error::DegenerateSentence) => dropped += 1,
                Err(e) => return Err(e).with_context(|| format!("normalizing {}", f.display())),
            }
        }
    }
    Ok((trees, dropped))
}

pub fn run(paths: &RunPaths, args: &IngestArgs) -> Result<()> {
    let format = match args.format {
        CorpusFormat::Auto => detect_format(&args.corpus)?,
        f => f,
    };
    let sources = match format {
        CorpusFormat::Flat => flat_sources(&args.corpus)?,
        CorpusFormat::Ptb => ptb_sources(&args.corpus)?,
        CorpusFormat::Auto => unreachable!(),
    };

    let mut manifest = RunManifest::load(&paths.manifest())?;
    let all_inputs: Vec<PathBuf> =
        sources.iter().flat_map(|(_, fs)| fs.iter().cloned()).collect();
    let inputs = checksum_map(&paths.run_dir, &all_inputs)?;
    let params = sha256_bytes(
        format!(
            "ingest v1 max_vocab={} min_freq={} keep_punct={} keep_suffix={}",
            args.max_vocab, args.min_freq, args.keep_punctuation, args.keep_label_suffixes
        )
        .as_bytes(),
    );
    if manifest.up_to_date("ingest", &params, &inputs, &paths.run_dir) {
        println!("ingest: up to date");
        return Ok(());
    }

    let policy = NormalizationPolicy {
        drop_punctuation: !args.keep_punctuation,
        strip_label_suffixes: !args.keep_label_suffixes,
    };

    let mut outputs = Vec::new();
    let mut train_trees = None;
    for (split, files) in &sources {
        let (trees, dropped) = read_split(files, &policy)?;
        if trees.is_empty() {
            bail!("split `{split}` is empty after normalization");
        }
        if dropped > 0 {
            println!("ingest: dropped {dropped} degenerate sentences from {split}");
        }
        let path = paths.trees(split);
        write_atomic(&path, render_trees(&trees).as_bytes())?;
        outputs.push(path);
        if split != "train" {
            let view: Vec<GoldTree> =
                trees.iter().filter(|t| t.len() < 10).cloned().collect();
            let path = paths.trees(&format!("{split}-wsj10"));
            write_atomic(&path, render_trees(&view).as_bytes())?;
            outputs.push(path);
        }
        println!("ingest: {split}: {} sentences", trees.len());
        if split == "train" {
            train_trees = Some(trees);
        }
    }

    let train_trees = train_trees.expect("train split present");
    let sentences: Vec<Vec<&str>> = train_trees
        .iter()
        .map(|t| t.tokens().iter().map(|tok| tok.surface.as_str()).collect())
        .collect();
    let vocab = Vocabulary::build(
        sentences.iter().map(|s| s.iter().copied()),
        args.max_vocab,
        args.min_freq,
    )?;
    write_atomic(&paths.vocab(), vocab.to_tsv().as_bytes())?;
    outputs.push(paths.vocab());
    println!("ingest: vocabulary of {} types", vocab.len());

    manifest.record(
        "ingest",
        StageRecord { params, inputs, outputs: checksum_map(&paths.run_dir, &outputs)? },
    );
    manifest.save(&paths.manifest())?;
    Ok(())
}
