use crate::error::{Error, Result};
use crate::induction::BinaryParse;
use crate::treebank::{GoldTree, Span};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Span-comparison conventions. Defaults follow the unlabeled-binary-F1
/// lineage: single-token and whole-sentence spans excluded, duplicates
/// counted once, gold compared as n-ary spans, sentence-level (macro)
/// averaging.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Conventions {
    pub exclude_len1: bool,
    pub exclude_full: bool,
    /// Compare against a right-branching binarization of the gold tree
    /// instead of its n-ary span set.
    pub binarize_gold: bool,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions { exclude_len1: true, exclude_full: true, binarize_gold: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Mean of per-sentence F1 scores.
    #[default]
    Macro,
    /// F1 of pooled span counts.
    Micro,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct F1Result {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl F1Result {
    fn from_counts(matched: usize, predicted: usize, gold: usize) -> Self {
        // A sentence with nothing to predict on either side is vacuously correct.
        if predicted == 0 && gold == 0 {
            return F1Result { precision: 1.0, recall: 1.0, f1: 1.0, matched, predicted, gold };
        }
        let precision = if predicted == 0 { 0.0 } else { matched as f64 / predicted as f64 };
        let recall = if gold == 0 { 0.0 } else { matched as f64 / gold as f64 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        F1Result { precision, recall, f1, matched, predicted, gold }
    }
}

fn filter_spans(spans: impl IntoIterator<Item = Span>, n: usize, conv: &Conventions) -> HashSet<Span> {
    let full = Span::new(0, n - 1);
    spans
        .into_iter()
        .filter(|s| !(conv.exclude_len1 && s.len() == 1) && !(conv.exclude_full && *s == full))
        .collect()
}

fn pred_span_set(pred: &BinaryParse, n: usize, conv: &Conventions) -> HashSet<Span> {
    filter_spans(pred.branch_spans(), n, conv)
}

fn gold_span_set(gold: &GoldTree, n: usize, conv: &Conventions) -> HashSet<Span> {
    if conv.binarize_gold {
        filter_spans(binarize_gold(gold).branch_spans(), n, conv)
    } else {
        filter_spans(gold.gold_spans(conv.exclude_len1, conv.exclude_full).into_iter().map(|(s, _)| s), n, conv)
    }
}

/// Right-branching binarization of an n-ary gold tree, labels dropped.
pub fn binarize_gold(tree: &GoldTree) -> BinaryParse {
    match tree {
        GoldTree::Leaf { token } => BinaryParse::Leaf(token.index),
        GoldTree::Internal { children, .. } => {
            let parts: Vec<BinaryParse> = children.iter().map(binarize_gold).collect();
            right_fold(parts)
        }
    }
}

fn right_fold(mut parts: Vec<BinaryParse>) -> BinaryParse {
    let mut acc = parts.pop().expect("internal node has at least one child");
    while let Some(left) = parts.pop() {
        acc = BinaryParse::Branch(Box::new(left), Box::new(acc));
    }
    acc
}

/// Unlabeled F1 of a predicted binary parse against a gold tree.
pub fn span_f1(pred: &BinaryParse, gold: &GoldTree, conv: &Conventions) -> Result<F1Result> {
    let n = gold.len();
    if pred.len() != n {
        return Err(Error::Misalignment {
            sentence: 0,
            message: format!("predicted {} tokens, gold {}", pred.len(), n),
        });
    }
    let p = pred_span_set(pred, n, conv);
    let g = gold_span_set(gold, n, conv);
    let matched = p.intersection(&g).count();
    Ok(F1Result::from_counts(matched, p.len(), g.len()))
}

/// Unlabeled F1 between two binary parses of the same sentence.
pub fn binary_pair_f1(pred: &BinaryParse, other: &BinaryParse, conv: &Conventions) -> Result<F1Result> {
    let n = other.len();
    if pred.len() != n {
        return Err(Error::Misalignment {
            sentence: 0,
            message: format!("parses cover {} vs {} tokens", pred.len(), n),
        });
    }
    let p = pred_span_set(pred, n, conv);
    let g = pred_span_set(other, n, conv);
    let matched = p.intersection(&g).count();
    Ok(F1Result::from_counts(matched, p.len(), g.len()))
}

fn aggregate(sentence_results: Vec<F1Result>, aggregation: Aggregation) -> F1Result {
    let matched: usize = sentence_results.iter().map(|r| r.matched).sum();
    let predicted: usize = sentence_results.iter().map(|r| r.predicted).sum();
    let gold: usize = sentence_results.iter().map(|r| r.gold).sum();
    match aggregation {
        Aggregation::Micro => F1Result::from_counts(matched, predicted, gold),
        Aggregation::Macro => {
            let n = sentence_results.len() as f64;
            let precision = sentence_results.iter().map(|r| r.precision).sum::<f64>() / n;
            let recall = sentence_results.iter().map(|r| r.recall).sum::<f64>() / n;
            let f1 = sentence_results.iter().map(|r| r.f1).sum::<f64>() / n;
            F1Result { precision, recall, f1, matched, predicted, gold }
        }
    }
}

/// Corpus-level F1 of predictions against gold trees.
pub fn corpus_f1(
    preds: &[BinaryParse],
    golds: &[GoldTree],
    conv: &Conventions,
    aggregation: Aggregation,
) -> Result<F1Result> {
    if preds.len() != golds.len() {
        return Err(Error::Misalignment {
            sentence: preds.len().min(golds.len()),
            message: format!("{} predictions vs {} gold trees", preds.len(), golds.len()),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut per_sentence = Vec::with_capacity(preds.len());
    for (idx, (p, g)) in preds.iter().zip(golds).enumerate() {
        let r = span_f1(p, g, conv).map_err(|e| match e {
            Error::Misalignment { message, .. } => Error::Misalignment { sentence: idx, message },
            other => other,
        })?;
        per_sentence.push(r);
    }
    Ok(aggregate(per_sentence, aggregation))
}

/// Corpus-level F1 between two sets of binary parses (used by self-F1).
pub fn pair_corpus_f1(
    a: &[BinaryParse],
    b: &[BinaryParse],
    conv: &Conventions,
    aggregation: Aggregation,
) -> Result<F1Result> {
    if a.len() != b.len() {
        return Err(Error::Misalignment {
            sentence: a.len().min(b.len()),
            message: format!("restart outputs have {} vs {} sentences", a.len(), b.len()),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut per_sentence = Vec::with_capacity(a.len());
    for (idx, (x, y)) in a.iter().zip(b).enumerate() {
        let r = binary_pair_f1(x, y, conv).map_err(|e| match e {
            Error::Misalignment { message, .. } => Error::Misalignment { sentence: idx, message },
            other => other,
        })?;
        per_sentence.push(r);
    }
    Ok(aggregate(per_sentence, aggregation))
}

/// Mean unlabeled F1 over every unordered pair of restarts.
pub fn self_f1(
    restarts: &[Vec<BinaryParse>],
    conv: &Conventions,
    aggregation: Aggregation,
) -> Result<f64> {
    if restarts.len() < 2 {
        return Err(Error::Config("self F1 needs at least 2 restarts".into()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..restarts.len() {
        for j in i + 1..restarts.len() {
            total += pair_corpus_f1(&restarts[i], &restarts[j], conv, aggregation)?.f1;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::induction::{build_tree, TieBreak};
    use crate::treebank::parse_ptb;

    fn gold(src: &str) -> GoldTree {
        parse_ptb(src).unwrap().remove(0)
    }

    fn parse_of(heights: &[f64]) -> BinaryParse {
        build_tree(heights, TieBreak::Leftmost)
    }

    #[test]
    fn identity_binarization_scores_one() {
        let g = gold("(S (NP (D a) (N b)) (VP (V c) (NP (D d) (N e))))");
        let pred = binarize_gold(&g);
        let conv = Conventions::default();
        let r = span_f1(&pred, &g, &conv).unwrap();
        assert_eq!(r.f1, 1.0);
    }

    #[test]
    fn disjoint_spans_score_zero() {
        // 3 tokens: pred spans {(0,1)}, gold spans {(1,2)}.
        let pred = parse_of(&[1.0, 2.0]); // ((a b)? no: max at idx1 -> (ab)|c => span (0,1)
        let g = gold("(S (X a) (NP (X b) (X c)))"); // gold internal: (1,2)
        let conv = Conventions::default();
        let r = span_f1(&pred, &g, &conv).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn half_overlap_scores_half() {
        // 4 tokens, pred spans {(0,1),(0,2)}, gold spans {(0,1),(2,3)}.
        let pred = parse_of(&[1.0, 2.0, 3.0]);
        assert_eq!(
            pred.branch_spans().into_iter().collect::<std::collections::HashSet<_>>(),
            [Span::new(0, 3), Span::new(0, 2), Span::new(0, 1)].into_iter().collect()
        );
        let g = gold("(S (NP (X a) (X b)) (VP (X c) (X d)))");
        let conv = Conventions::default();
        let r = span_f1(&pred, &g, &conv).unwrap();
        assert!((r.precision - 0.5).abs() < 1e-12);
        assert!((r.recall - 0.5).abs() < 1e-12);
        assert!((r.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_is_error() {
        let pred = parse_of(&[1.0]);
        let g = gold("(S (X a) (X b) (X c))");
        assert!(span_f1(&pred, &g, &Conventions::default()).is_err());
    }

    #[test]
    fn macro_average_of_one_and_zero() {
        let g1 = gold("(S (NP (X a) (X b)) (X c))");
        let g2 = gold("(S (X a) (NP (X b) (X c)))");
        let p1 = parse_of(&[1.0, 2.0]); // span (0,1): matches g1
        let p2 = parse_of(&[1.0, 2.0]); // span (0,1): misses g2's (1,2)
        let r = corpus_f1(&[p1, p2], &[g1, g2], &Conventions::default(), Aggregation::Macro)
            .unwrap();
        assert!((r.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn micro_and_macro_differ_on_skewed_corpora() {
        // Sentence A: 3 tokens, 1 comparable span. Sentence B: 6 tokens, 4 spans.
        let ga = gold("(S (NP (X a) (X b)) (X c))");
        let gb = gold("(S (NP (X a) (X b)) (VP (X c) (NP (X d) (NP (X e) (X f)))))");
        let pa = parse_of(&[1.0, 2.0]); // matches ga's single span
        let pb = parse_of(&[5.0, 1.0, 2.0, 3.0, 4.0]); // right-branching-ish
        let conv = Conventions::default();
        let macro_r = corpus_f1(
            &[pa.clone(), pb.clone()],
            &[ga.clone(), gb.clone()],
            &conv,
            Aggregation::Macro,
        )
        .unwrap();
        let micro_r = corpus_f1(&[pa, pb], &[ga, gb], &conv, Aggregation::Micro).unwrap();
        assert!((macro_r.f1 - micro_r.f1).abs() > 1e-6);
    }

    #[test]
    fn symmetric_for_binary_pairs() {
        let a = parse_of(&[0.3, 0.9, 0.1, 0.5]);
        let b = parse_of(&[0.5, 0.1, 0.9, 0.3]);
        let conv = Conventions::default();
        let ab = binary_pair_f1(&a, &b, &conv).unwrap();
        let ba = binary_pair_f1(&b, &a, &conv).unwrap();
        assert_eq!(ab.f1, ba.f1);
    }

    #[test]
    fn self_f1_of_identical_restarts_is_one() {
        let parses = vec![parse_of(&[0.3, 0.9, 0.1]), parse_of(&[1.0, 2.0])];
        let restarts = vec![parses.clone(), parses.clone(), parses];
        let v = self_f1(&restarts, &Conventions::default(), Aggregation::Macro).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn self_f1_of_two_restarts_is_their_pair_score() {
        let a = vec![parse_of(&[0.3, 0.9, 0.1, 0.5])];
        let b = vec![parse_of(&[0.5, 0.1, 0.9, 0.3])];
        let conv = Conventions::default();
        let pair = pair_corpus_f1(&a, &b, &conv, Aggregation::Macro).unwrap().f1;
        let sf = self_f1(&[a, b], &conv, Aggregation::Macro).unwrap();
        assert_eq!(sf, pair);
    }
}
