use serde::{Deserialize, Serialize};

/// A POS-tagged leaf token. `index` is the 0-based position in the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub pos: String,
    pub index: usize,
}

/// Contiguous token span, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An n-ary labeled constituency tree with POS-tagged leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldTree {
    Internal { label: String, children: Vec<GoldTree> },
    Leaf { token: Token },
}

impl GoldTree {
    pub fn internal(label: impl Into<String>, children: Vec<GoldTree>) -> Self {
        GoldTree::Internal { label: label.into(), children }
    }

    pub fn leaf(surface: impl Into<String>, pos: impl Into<String>, index: usize) -> Self {
        GoldTree::Leaf { token: Token { surface: surface.into(), pos: pos.into(), index } }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, GoldTree::Leaf { .. })
    }

    /// Leaf tokens, left to right.
    pub fn tokens(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a Token>) {
        match self {
            GoldTree::Leaf { token } => out.push(token),
            GoldTree::Internal { children, .. } => {
                for c in children {
                    c.collect_tokens(out);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GoldTree::Leaf { .. } => 1,
            GoldTree::Internal { children, .. } => children.iter().map(|c| c.len()).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Token span covered by this node. Valid after index re-packing.
    pub fn span(&self) -> Span {
        let toks = self.tokens();
        Span::new(toks[0].index, toks[toks.len() - 1].index)
    }

    /// Bracketed rendering, inverse of `parse_ptb` for a single tree.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }

    fn render_into(&self, out: &mut String) {
        match self {
            GoldTree::Leaf { token } => {
                out.push('(');
                out.push_str(&token.pos);
                out.push(' ');
                out.push_str(&token.surface);
                out.push(')');
            }
            GoldTree::Internal { label, children } => {
                out.push('(');
                out.push_str(label);
                for c in children {
                    out.push(' ');
                    c.render_into(out);
                }
                out.push(')');
            }
        }
    }

    /// Re-assign leaf indices 0..n-1 in left-to-right order.
    pub fn reindex(&mut self) {
        let mut next = 0usize;
        self.reindex_from(&mut next);
    }

    fn reindex_from(&mut self, next: &mut usize) {
        match self {
            GoldTree::Leaf { token } => {
                token.index = *next;
                *next += 1;
            }
            GoldTree::Internal { children, .. } => {
                for c in children {
                    c.reindex_from(next);
                }
            }
        }
    }

    /// Gold constituent spans, one per internal node, with unary duplicates
    /// collapsed. Whole-sentence spans are dropped when `exclude_full`,
    /// single-token spans when `exclude_len1`.
    pub fn gold_spans(&self, exclude_len1: bool, exclude_full: bool) -> Vec<(Span, String)> {
        let full = self.span();
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        self.collect_spans(exclude_len1, exclude_full, full, &mut seen, &mut out);
        out
    }

    fn collect_spans(
        &self,
        exclude_len1: bool,
        exclude_full: bool,
        full: Span,
        seen: &mut std::collections::HashSet<(Span, String)>,
        out: &mut Vec<(Span, String)>,
    ) {
        if let GoldTree::Internal { label, children } = self {
            let span = self.span();
            let keep = !(exclude_len1 && span.len() == 1) && !(exclude_full && span == full);
            if keep && seen.insert((span, label.clone())) {
                out.push((span, label.clone()));
            }
            for c in children {
                c.collect_spans(exclude_len1, exclude_full, full, seen, out);
            }
        }
    }

    /// Number of children of internal nodes; leaves report 0.
    pub fn arity(&self) -> usize {
        match self {
            GoldTree::Leaf { .. } => 0,
            GoldTree::Internal { children, .. } => children.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_token_tree() -> GoldTree {
        // (S (NP (X a) (X b)) (VP (X c)))
        GoldTree::internal(
            "S",
            vec![
                GoldTree::internal("NP", vec![GoldTree::leaf("a", "X", 0), GoldTree::leaf("b", "X", 1)]),
                GoldTree::internal("VP", vec![GoldTree::leaf("c", "X", 2)]),
            ],
        )
    }

    #[test]
    fn gold_spans_excludes_full_and_len1() {
        let t = three_token_tree();
        let spans = t.gold_spans(true, true);
        assert_eq!(spans, vec![(Span::new(0, 1), "NP".to_string())]);
    }

    #[test]
    fn gold_spans_includes_full_when_asked() {
        let t = three_token_tree();
        let spans = t.gold_spans(true, false);
        assert!(spans.contains(&(Span::new(0, 2), "S".to_string())));
        assert_eq!(spans.len(), 2);
    }

    #[test]
    fn single_leaf_has_no_spans() {
        let t = GoldTree::leaf("a", "X", 0);
        assert!(t.gold_spans(true, true).is_empty());
    }

    #[test]
    fn unary_chain_duplicates_collapse() {
        // (NP (NP (X a) (X b))) — same (span,label) twice
        let inner =
            GoldTree::internal("NP", vec![GoldTree::leaf("a", "X", 0), GoldTree::leaf("b", "X", 1)]);
        let t = GoldTree::internal("NP", vec![inner]);
        let spans = t.gold_spans(true, false);
        assert_eq!(spans.len(), 1);
    }
}
