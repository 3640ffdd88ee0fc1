use crate::error::{Error, Result};
use crate::induction::heights::{heights_from_trace, HeightVector};
use crate::model::{forward_sequence, Checkpoint};
use crate::treebank::{CorpusSplit, Span};
use rayon::prelude::*;

/// Unlabeled strictly-binary tree over token indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinaryParse {
    Leaf(usize),
    Branch(Box<BinaryParse>, Box<BinaryParse>),
}

/// Tie handling when several split points share the maximum height.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    Leftmost,
    Rightmost,
}

impl BinaryParse {
    pub fn span(&self) -> Span {
        match self {
            BinaryParse::Leaf(i) => Span::new(*i, *i),
            BinaryParse::Branch(l, r) => Span::new(l.span().start, r.span().end),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BinaryParse::Leaf(_) => 1,
            BinaryParse::Branch(l, r) => l.len() + r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spans of all branch nodes (each covers >= 2 tokens).
    pub fn branch_spans(&self) -> Vec<Span> {
        let mut out = Vec::new();
        self.collect_spans(&mut out);
        out
    }

    fn collect_spans(&self, out: &mut Vec<Span>) {
        if let BinaryParse::Branch(l, r) = self {
            out.push(self.span());
            l.collect_spans(out);
            r.collect_spans(out);
        }
    }

    /// Bracketed rendering over the given token surfaces; a single-leaf tree
    /// renders as the bare token.
    pub fn render(&self, surfaces: &[&str]) -> String {
        match self {
            BinaryParse::Leaf(i) => surfaces[*i].to_string(),
            BinaryParse::Branch(l, r) => {
                format!("( {} {} )", l.render(surfaces), r.render(surfaces))
            }
        }
    }

    /// Parse the `render` format back into a tree (token identities are
    /// positional; surfaces are ignored beyond delimiting).
    pub fn parse(line: &str) -> Result<BinaryParse> {
        let spaced = line.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut next_leaf = 0usize;
        let mut pos = 0usize;
        let tree = parse_node(&tokens, &mut pos, &mut next_leaf)?;
        if pos != tokens.len() {
            return Err(Error::TreebankParse {
                offset: pos,
                message: "trailing content in parse line".into(),
            });
        }
        Ok(tree)
    }
}

fn parse_node(tokens: &[&str], pos: &mut usize, next_leaf: &mut usize) -> Result<BinaryParse> {
    match tokens.get(*pos) {
        None => Err(Error::TreebankParse { offset: *pos, message: "unexpected end of parse line".into() }),
        Some(&"(") => {
            *pos += 1;
            let left = parse_node(tokens, pos, next_leaf)?;
            let right = parse_node(tokens, pos, next_leaf)?;
            if tokens.get(*pos) != Some(&")") {
                return Err(Error::TreebankParse {
                    offset: *pos,
                    message: "expected ')' in parse line".into(),
                });
            }
            *pos += 1;
            Ok(BinaryParse::Branch(Box::new(left), Box::new(right)))
        }
        Some(&")") => {
            Err(Error::TreebankParse { offset: *pos, message: "unexpected ')' in parse line".into() })
        }
        Some(_) => {
            let leaf = BinaryParse::Leaf(*next_leaf);
            *next_leaf += 1;
            *pos += 1;
            Ok(leaf)
        }
    }
}

/// Build a binary tree by recursively splitting at the maximum-height split
/// point. `heights` has n-1 entries for n tokens.
pub fn build_tree(heights: &[f64], tie_break: TieBreak) -> BinaryParse {
    build_range(heights, 0, heights.len(), tie_break)
}

// Tokens lo..=hi where hi = lo + (number of internal splits). Split index k
// separates token k and k+1.
fn build_range(heights: &[f64], lo: usize, hi: usize, tie_break: TieBreak) -> BinaryParse {
    if lo == hi {
        return BinaryParse::Leaf(lo);
    }
    let mut best = lo;
    for k in lo..hi {
        let better = match tie_break {
            TieBreak::Leftmost => heights[k] > heights[best],
            TieBreak::Rightmost => heights[k] >= heights[best],
        };
        if better {
            best = k;
        }
    }
    let left = build_range(heights, lo, best, tie_break);
    let right = build_range(heights, best + 1, hi, tie_break);
    BinaryParse::Branch(Box::new(left), Box::new(right))
}

pub(super) fn parse_corpus_impl(
    checkpoint: &Checkpoint,
    split: &CorpusSplit,
    layer: usize,
) -> Result<Vec<(BinaryParse, HeightVector)>> {
    if layer == 0 || layer > checkpoint.config.num_layers {
        return Err(Error::LayerOutOfRange { layer, num_layers: checkpoint.config.num_layers });
    }
    split
        .sentences
        .par_iter()
        .enumerate()
        .map(|(idx, (ids, _))| {
            let out = forward_sequence(ids, &checkpoint.params, &checkpoint.config, None, None)
                .map_err(|e| Error::Misalignment { sentence: idx, message: e.to_string() })?;
            let heights = heights_from_trace(&out.trace, layer)?;
            Ok((build_tree(&heights, TieBreak::Leftmost), heights))
        })
        .collect()
}

/// Parse a corpus split in inference mode; one binary tree per sentence.
pub fn parse_corpus(
    checkpoint: &Checkpoint,
    split: &CorpusSplit,
    layer: usize,
) -> Result<Vec<BinaryParse>> {
    Ok(parse_corpus_impl(checkpoint, split, layer)?.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(t: &BinaryParse) -> String {
        match t {
            BinaryParse::Leaf(i) => format!("{i}"),
            BinaryParse::Branch(l, r) => format!("({} {})", shape(l), shape(r)),
        }
    }

    #[test]
    fn worked_example_four_tokens() {
        // heights [3,1,2] over a b c d: split at 3 -> a | bcd,
        // then 2 -> bc | d, then 1 -> b | c.
        let t = build_tree(&[3.0, 1.0, 2.0], TieBreak::Leftmost);
        assert_eq!(shape(&t), "(0 ((1 2) 3))");
    }

    #[test]
    fn two_tokens_only_one_tree() {
        let t = build_tree(&[0.42], TieBreak::Leftmost);
        assert_eq!(shape(&t), "(0 1)");
    }

    #[test]
    fn leftmost_tie_break() {
        let t = build_tree(&[1.0, 1.0], TieBreak::Leftmost);
        assert_eq!(shape(&t), "(0 (1 2))");
    }

    #[test]
    fn single_token() {
        let t = build_tree(&[], TieBreak::Leftmost);
        assert_eq!(t, BinaryParse::Leaf(0));
    }

    #[test]
    fn branch_count_and_yield() {
        let heights = [0.3, 0.9, 0.1, 0.5, 0.7];
        let t = build_tree(&heights, TieBreak::Leftmost);
        assert_eq!(t.len(), 6);
        assert_eq!(t.branch_spans().len(), 5);
        assert_eq!(t.span(), Span::new(0, 5));
    }

    #[test]
    fn render_parse_roundtrip() {
        let t = build_tree(&[3.0, 1.0, 2.0], TieBreak::Leftmost);
        let surfaces = ["a", "b", "c", "d"];
        let line = t.render(&surfaces);
        assert_eq!(line, "( a ( ( b c ) d ) )");
        let back = BinaryParse::parse(&line).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn single_leaf_renders_bare() {
        let t = BinaryParse::Leaf(0);
        assert_eq!(t.render(&["word"]), "word");
        assert_eq!(BinaryParse::parse("word").unwrap(), t);
    }

    #[test]
    fn monotone_relabeling_leaves_tree_unchanged() {
        let heights = [0.3, 0.9, 0.1, 0.5, 0.7, 0.2];
        let a = build_tree(&heights, TieBreak::Leftmost);
        let mapped: Vec<f64> = heights.iter().map(|h| h.exp() * 3.0 + 1.0).collect();
        let b = build_tree(&mapped, TieBreak::Leftmost);
        assert_eq!(a, b);
    }
}
