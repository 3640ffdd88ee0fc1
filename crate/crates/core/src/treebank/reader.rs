use crate::error::{Error, Result};
use crate::treebank::GoldTree;

/// Parse concatenated bracketed s-expressions into trees, one per top-level
/// expression. An extra unlabeled outer `( ... )` wrapper around a single
/// tree (the PTB `.mrg` convention) is unwrapped.
pub fn parse_ptb(text: &str) -> Result<Vec<GoldTree>> {
    let mut parser = Parser { bytes: text.as_bytes(), pos: 0 };
    let mut trees = Vec::new();
    loop {
        parser.skip_ws();
        if parser.at_end() {
            break;
        }
        let mut tree = parser.parse_node()?;
        // Unwrap "( (S ...) )" style wrappers.
        while let GoldTree::Internal { label, children } = &tree {
            if label.is_empty() && children.len() == 1 {
                tree = children[0].clone();
            } else {
                break;
            }
        }
        let mut tree = tree;
        tree.reindex();
        trees.push(tree);
    }
    Ok(trees)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::TreebankParse { offset: self.pos, message: message.into() }
    }

    /// Atom = maximal run of non-whitespace, non-paren bytes.
    fn parse_atom(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() || b == b'(' || b == b')' {
                break;
            }
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()
    }

    fn parse_node(&mut self) -> Result<GoldTree> {
        self.skip_ws();
        if self.at_end() || self.bytes[self.pos] != b'(' {
            return Err(self.err("expected '('"));
        }
        self.pos += 1;
        self.skip_ws();
        let label = self.parse_atom();
        self.skip_ws();
        if self.at_end() {
            return Err(self.err("unbalanced parentheses: unexpected end of input"));
        }
        match self.bytes[self.pos] {
            b'(' => {
                // Internal node with child list. An empty label is legal only
                // for the outer PTB wrapper, which parse_ptb unwraps.
                let mut children = Vec::new();
                while !self.at_end() && self.bytes[self.pos] == b'(' {
                    children.push(self.parse_node()?);
                    self.skip_ws();
                }
                if self.at_end() || self.bytes[self.pos] != b')' {
                    return Err(self.err("unbalanced parentheses: missing ')'"));
                }
                self.pos += 1;
                if label.is_empty() && children.len() != 1 {
                    return Err(self.err("empty label where a child list is expected"));
                }
                Ok(GoldTree::internal(label, children))
            }
            b')' => {
                // "(POS word)" already consumed "word" as part of... no:
                // a ')' right after the label means "(label)" — no children.
                Err(self.err("node has a label but no children or terminal"))
            }
            _ => {
                // Terminal: "(POS word)".
                if label.is_empty() {
                    return Err(self.err("empty label on a terminal node"));
                }
                let word = self.parse_atom();
                self.skip_ws();
                if self.at_end() || self.bytes[self.pos] != b')' {
                    return Err(self.err("unbalanced parentheses: missing ')' after terminal"));
                }
                self.pos += 1;
                Ok(GoldTree::leaf(word, label, 0))
            }
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::{normalize_tree, NormalizationPolicy};

    #[test]
    fn parses_simple_sentence() {
        let trees = parse_ptb("(S (NP (DT the) (NN cat)) (VP (VBZ sleeps)))").unwrap();
        assert_eq!(trees.len(), 1);
        let t = &trees[0];
        let surfaces: Vec<_> = t.tokens().iter().map(|t| t.surface.clone()).collect();
        assert_eq!(surfaces, vec!["the", "cat", "sleeps"]);
        match t {
            GoldTree::Internal { label, .. } => assert_eq!(label, "S"),
            _ => panic!("expected internal root"),
        }
    }

    #[test]
    fn unwraps_outer_parens_and_traces_normalize_away() {
        let trees = parse_ptb("((S (NP-SBJ (-NONE- *T*)) (VP (VB go))))").unwrap();
        assert_eq!(trees.len(), 1);
        let norm = normalize_tree(&trees[0], &NormalizationPolicy::default()).unwrap();
        let surfaces: Vec<_> = norm.tokens().iter().map(|t| t.surface.clone()).collect();
        assert_eq!(surfaces, vec!["go"]);
    }

    #[test]
    fn unbalanced_input_is_an_error() {
        let err = parse_ptb("(S (NP (DT the)").unwrap_err();
        match err {
            Error::TreebankParse { offset, .. } => assert_eq!(offset, 15),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn multiple_trees_and_multiline_input() {
        let text = "(S (X a))\n(S (X b)\n   (X c))";
        let trees = parse_ptb(text).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[1].len(), 2);
    }

    #[test]
    fn roundtrip_render_parse() {
        let src = "(S (NP-SBJ (DT the) (NN cat)) (VP (VBZ sleeps) (ADVP (RB soundly))))";
        let t = parse_ptb(src).unwrap().remove(0);
        let again = parse_ptb(&t.render()).unwrap().remove(0);
        assert_eq!(t, again);
    }
}
