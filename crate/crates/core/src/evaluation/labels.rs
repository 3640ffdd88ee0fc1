use crate::error::{Error, Result};
use crate::induction::BinaryParse;
use crate::treebank::{GoldTree, Span};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelAccuracyRow {
    pub label: String,
    pub accuracy: f64,
    pub accuracy_sd: f64,
    pub baseline: f64,
    pub baseline_sd: f64,
    pub delta: f64,
    pub occurrences: usize,
}

/// Qualifying gold occurrences: non-unary internal nodes (>= 2 children)
/// whose span does not cover the whole sentence.
fn qualifying_occurrences(golds: &[GoldTree]) -> Vec<(usize, Span, String)> {
    let mut out = Vec::new();
    for (idx, g) in golds.iter().enumerate() {
        let full = g.span();
        collect(g, idx, full, &mut out);
    }
    out
}

fn collect(node: &GoldTree, idx: usize, full: Span, out: &mut Vec<(usize, Span, String)>) {
    if let GoldTree::Internal { label, children } = node {
        let span = node.span();
        if children.len() >= 2 && span != full {
            out.push((idx, span, label.clone()));
        }
        for c in children {
            collect(c, idx, full, out);
        }
    }
}

/// Per-label accuracy of one restart: a gold constituent is correct iff its
/// exact span appears in the predicted parse. Returns label -> (correct, total).
pub fn label_accuracy_single(
    preds: &[BinaryParse],
    golds: &[GoldTree],
) -> Result<HashMap<String, (usize, usize)>> {
    if preds.len() != golds.len() {
        return Err(Error::Misalignment {
            sentence: preds.len().min(golds.len()),
            message: format!("{} predictions vs {} gold trees", preds.len(), golds.len()),
        });
    }
    let pred_spans: Vec<HashSet<Span>> =
        preds.iter().map(|p| p.branch_spans().into_iter().collect()).collect();
    let mut table: HashMap<String, (usize, usize)> = HashMap::new();
    for (idx, span, label) in qualifying_occurrences(golds) {
        let entry = table.entry(label).or_insert((0, 0));
        entry.1 += 1;
        if pred_spans[idx].contains(&span) {
            entry.0 += 1;
        }
    }
    Ok(table)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Table-2-style rows: per-label accuracy (in percent) averaged over model
/// restarts, against a random-baseline ensemble, for every label with more
/// than `min_count` qualifying occurrences. Sorted by descending delta.
pub fn label_accuracy(
    restarts: &[Vec<BinaryParse>],
    baselines: &[Vec<BinaryParse>],
    golds: &[GoldTree],
    min_count: usize,
) -> Result<Vec<LabelAccuracyRow>> {
    let occurrence_counts: HashMap<String, usize> = {
        let mut m = HashMap::new();
        for (_, _, label) in qualifying_occurrences(golds) {
            *m.entry(label).or_insert(0) += 1;
        }
        m
    };

    let per_restart: Vec<HashMap<String, (usize, usize)>> =
        restarts.iter().map(|p| label_accuracy_single(p, golds)).collect::<Result<_>>()?;
    let per_baseline: Vec<HashMap<String, (usize, usize)>> =
        baselines.iter().map(|p| label_accuracy_single(p, golds)).collect::<Result<_>>()?;

    let acc_of = |tables: &[HashMap<String, (usize, usize)>], label: &str| -> Vec<f64> {
        tables
            .iter()
            .map(|t| {
                let (c, n) = t.get(label).copied().unwrap_or((0, 0));
                if n == 0 {
                    0.0
                } else {
                    100.0 * c as f64 / n as f64
                }
            })
            .collect()
    };

    let mut rows = Vec::new();
    for (label, &count) in &occurrence_counts {
        if count <= min_count {
            continue;
        }
        let (accuracy, accuracy_sd) = mean_sd(&acc_of(&per_restart, label));
        let (baseline, baseline_sd) = if per_baseline.is_empty() {
            (0.0, 0.0)
        } else {
            mean_sd(&acc_of(&per_baseline, label))
        };
        rows.push(LabelAccuracyRow {
            label: label.clone(),
            accuracy,
            accuracy_sd,
            baseline,
            baseline_sd,
            delta: accuracy - baseline,
            occurrences: count,
        });
    }
    rows.sort_by(|a, b| {
        b.delta.partial_cmp(&a.delta).unwrap().then_with(|| a.label.cmp(&b.label))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::binarize_gold;
    use crate::induction::{build_tree, TieBreak};
    use crate::treebank::parse_ptb;

    fn gold(src: &str) -> GoldTree {
        parse_ptb(src).unwrap().remove(0)
    }

    #[test]
    fn perfect_parser_scores_hundred_everywhere() {
        let golds = vec![
            gold("(S (NP (D a) (N b)) (VP (V c) (NP (D d) (N e))))"),
            gold("(S (NP (D f) (N g)) (VP (V h)))"),
        ];
        let preds: Vec<BinaryParse> = golds.iter().map(binarize_gold).collect();
        let rows = label_accuracy(&[preds.clone()], &[preds], &golds, 0).unwrap();
        for row in &rows {
            assert_eq!(row.accuracy, 100.0);
        }
        // NP occurs 3 times (the whole-sentence S spans are not NP).
        let np = rows.iter().find(|r| r.label == "NP").unwrap();
        assert_eq!(np.occurrences, 3);
    }

    #[test]
    fn whole_sentence_constituents_do_not_count() {
        let golds = vec![gold("(NP (D a) (N b))")];
        let preds = vec![build_tree(&[1.0], TieBreak::Leftmost)];
        let rows = label_accuracy(&[preds.clone()], &[preds], &golds, 0).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn unary_nodes_do_not_count() {
        // The unary (NP (NN a)) wraps a single child.
        let golds = vec![gold("(S (NP (NN a)) (VP (V b) (N c)))")];
        let preds = vec![build_tree(&[2.0, 1.0], TieBreak::Leftmost)];
        let rows = label_accuracy(&[preds.clone()], &[preds], &golds, 0).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].label, "VP");
    }

    #[test]
    fn fixture_half_present_scores_fifty() {
        // One NP (0,1); restart 1 predicts it, restart 2 does not.
        let golds = vec![gold("(S (NP (D a) (N b)) (V c))")];
        // heights [1,2]: max at index 1 -> (a b) | c, predicting span (0,1).
        // heights [2,1]: max at index 0 -> a | (b c), missing it.
        let hit = vec![build_tree(&[1.0, 2.0], TieBreak::Leftmost)];
        let miss = vec![build_tree(&[2.0, 1.0], TieBreak::Leftmost)];
        let rows = label_accuracy(&[miss, hit], &[], &golds, 0).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].label, "NP");
        assert!((rows[0].accuracy - 50.0).abs() < 1e-9);
    }

    #[test]
    fn strict_min_count_filter() {
        let golds = vec![
            gold("(S (NP (D a) (N b)) (V c))"),
            gold("(S (NP (D d) (N e)) (V f))"),
        ];
        let preds: Vec<BinaryParse> = golds.iter().map(binarize_gold).collect();
        // NP occurs twice; with min_count=2 the strict > filter drops it.
        let rows = label_accuracy(&[preds], &[], &golds, 2).unwrap();
        assert!(rows.is_empty());
    }
}
