pub mod eval;
pub mod ingest;
pub mod parse;
pub mod report;
pub mod synth;
pub mod train;

use crate::layout::{read_to_string, RunPaths};
use anyhow::{bail, Context, Result};
use onlab_core::induction::BinaryParse;
use onlab_core::treebank::{parse_ptb, GoldTree, Vocabulary};
use std::path::Path;

/// One normalized tree per line.
pub fn load_trees(path: &Path) -> Result<Vec<GoldTree>> {
    let text = read_to_string(path)?;
    parse_ptb(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_vocab(paths: &RunPaths) -> Result<Vocabulary> {
    let text = read_to_string(&paths.vocab())?;
    Vocabulary::from_tsv(&text).context("parsing vocab.tsv")
}

/// One bracketed binary tree per line, aligned with the gold split.
pub fn load_parses(path: &Path) -> Result<Vec<BinaryParse>> {
    let text = read_to_string(path)?;
    text.lines()
        .enumerate()
        .map(|(i, l)| {
            BinaryParse::parse(l).with_context(|| format!("{}:{}", path.display(), i + 1))
        })
        .collect()
}

/// One whitespace-separated height vector per line; blank line = one-token
/// sentence.
pub fn load_heights(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_to_string(path)?;
    text.lines()
        .enumerate()
        .map(|(i, l)| {
            l.split_whitespace()
                .map(|v| {
                    v.parse::<f64>()
                        .with_context(|| format!("{}:{}: bad height `{v}`", path.display(), i + 1))
                })
                .collect()
        })
        .collect()
}

pub fn render_heights(heights: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for h in heights {
        let row: Vec<String> = h.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn render_parses(parses: &[BinaryParse], golds: &[GoldTree]) -> Result<String> {
    if parses.len() != golds.len() {
        bail!("parse/gold count mismatch: {} vs {}", parses.len(), golds.len());
    }
    let mut out = String::new();
    for (p, g) in parses.iter().zip(golds) {
        let tokens = g.tokens();
        let surfaces: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
        out.push_str(&p.render(&surfaces));
        out.push('\n');
    }
    Ok(out)
}

pub fn render_trees(trees: &[GoldTree]) -> String {
    let mut out = String::new();
    for t in trees {
        out.push_str(&t.render());
        out.push('\n');
    }
    out
}

/// Label used in file names: the split, with a `-wsj10` suffix for the
/// short-sentence view.
pub fn split_label(split: &str, wsj10: bool) -> String {
    if wsj10 {
        format!("{split}-wsj10")
    } else {
        split.to_string()
    }
}
