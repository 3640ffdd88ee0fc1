use crate::error::{Error, Result};
use crate::treebank::{GoldTree, Span};
use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// POS tags treated as verbal for the case study.
pub const VERBAL_POS: &[&str] = &["VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "MD"];

/// A sampled subordinate clause: sentence index and its gold span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SbarInstance {
    pub sentence: usize,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbarCase {
    /// Highest split immediately before a verbal token inside the clause.
    Verb,
    /// Highest split at the clause border (before the first or after the
    /// last token).
    Border,
    Other,
}

/// Case percentages for one parser restart. They sum to 100 over the sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SbarCaseCounts {
    pub verb: f64,
    pub border: f64,
    pub other: f64,
}

/// Uniform sample without replacement of gold SBAR constituents that do not
/// span a whole sentence. Fewer than `k` qualifying instances returns them all.
pub fn sample_sbars(golds: &[GoldTree], k: usize, seed: u64) -> Vec<SbarInstance> {
    let mut pool = Vec::new();
    for (idx, g) in golds.iter().enumerate() {
        let full = g.span();
        collect_sbars(g, idx, full, &mut pool);
    }
    if pool.len() <= k {
        return pool;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<SbarInstance> =
        index_sample(&mut rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();
    picked.sort_by_key(|s| (s.sentence, s.span));
    picked
}

fn collect_sbars(node: &GoldTree, idx: usize, full: Span, out: &mut Vec<SbarInstance>) {
    if let GoldTree::Internal { label, children } = node {
        let span = node.span();
        if label == "SBAR" && span != full {
            out.push(SbarInstance { sentence: idx, span });
        }
        for c in children {
            collect_sbars(c, idx, full, out);
        }
    }
}

/// Classify the highest split point inside a clause span [i, j] (borders
/// included). Candidate boundaries sit before token i through after token j;
/// the sentence edges themselves carry no height and are skipped. Ties break
/// leftmost, matching the tree-building rule. Border beats verb when the
/// border token is itself verbal.
pub fn classify_sbar(heights: &[f64], gold: &GoldTree, span: Span) -> Result<SbarCase> {
    let n = heights.len() + 1;
    let (i, j) = (span.start, span.end);
    if i == 0 && j == n - 1 {
        return Err(Error::Misalignment {
            sentence: 0,
            message: "SBAR spans the whole sentence".into(),
        });
    }
    // Boundary b separates token b-1 and token b; height heights[b-1].
    let lo = i.max(1);
    let hi = (j + 1).min(n - 1);
    let mut best = lo;
    for b in lo..=hi {
        if heights[b - 1] > heights[best - 1] {
            best = b;
        }
    }
    if best == i || best == j + 1 {
        return Ok(SbarCase::Border);
    }
    let tokens = gold.tokens();
    let pos = &tokens[best].pos;
    if VERBAL_POS.contains(&pos.as_str()) {
        Ok(SbarCase::Verb)
    } else {
        Ok(SbarCase::Other)
    }
}

/// Run the case study for one restart's heights over the sampled instances.
/// Instances whose clause spans a whole sentence are skipped.
pub fn sbar_case_study(
    heights: &[Vec<f64>],
    golds: &[GoldTree],
    sample: &[SbarInstance],
) -> Result<SbarCaseCounts> {
    let mut counts = [0usize; 3];
    let mut used = 0usize;
    for inst in sample {
        let g = golds.get(inst.sentence).ok_or(Error::Misalignment {
            sentence: inst.sentence,
            message: "sampled sentence out of range".into(),
        })?;
        let h = &heights[inst.sentence];
        match classify_sbar(h, g, inst.span) {
            Ok(SbarCase::Verb) => counts[0] += 1,
            Ok(SbarCase::Border) => counts[1] += 1,
            Ok(SbarCase::Other) => counts[2] += 1,
            Err(_) => continue, // whole-sentence clause: skipped and reported upstream
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyCorpus);
    }
    let pct = |c: usize| 100.0 * c as f64 / used as f64;
    Ok(SbarCaseCounts { verb: pct(counts[0]), border: pct(counts[1]), other: pct(counts[2]) })
}

/// Split-point heights consistent with a gold tree: boundaries between the
/// children of a shallower node are higher than any boundary deeper in the
/// tree. Used for the gold row of the case study and in tests.
pub fn gold_heights(tree: &GoldTree) -> Vec<f64> {
    let n = tree.len();
    let mut heights = vec![0.0; n.saturating_sub(1)];
    assign_heights(tree, 0.0, &mut heights);
    heights
}

fn assign_heights(node: &GoldTree, depth: f64, heights: &mut [f64]) {
    if let GoldTree::Internal { children, .. } = node {
        for pair in children.windows(2) {
            let boundary = pair[1].span().start;
            heights[boundary - 1] = -depth;
        }
        for c in children {
            assign_heights(c, depth + 1.0, heights);
        }
    }
}
