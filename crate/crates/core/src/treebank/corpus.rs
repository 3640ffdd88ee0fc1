use crate::treebank::{GoldTree, Vocabulary};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitName {
    Train,
    Dev,
    Test,
    Wsj10View,
}

impl std::fmt::Display for SplitName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
            SplitName::Wsj10View => "wsj10-view",
        };
        f.write_str(s)
    }
}

/// A corpus split: normalized gold trees paired with their token-id sequences.
#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub name: SplitName,
    pub sentences: Vec<(Vec<usize>, GoldTree)>,
}

impl CorpusSplit {
    /// Encode normalized trees against a vocabulary.
    pub fn from_trees(name: SplitName, trees: Vec<GoldTree>, vocab: &Vocabulary) -> Self {
        let sentences = trees
            .into_iter()
            .map(|t| {
                let ids = vocab.encode(t.tokens().iter().map(|tok| tok.surface.as_str()));
                (ids, t)
            })
            .collect();
        CorpusSplit { name, sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Sentences with fewer than 10 tokens after normalization, order preserved.
    pub fn wsj10_view(&self) -> CorpusSplit {
        CorpusSplit {
            name: SplitName::Wsj10View,
            sentences: self
                .sentences
                .iter()
                .filter(|(ids, _)| ids.len() < 10)
                .cloned()
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::{normalize_tree, parse_ptb, NormalizationPolicy};

    fn chain(n: usize) -> GoldTree {
        let src = format!(
            "(S {})",
            (0..n).map(|i| format!("(X w{i})")).collect::<Vec<_>>().join(" ")
        );
        let t = parse_ptb(&src).unwrap().remove(0);
        normalize_tree(&t, &NormalizationPolicy::default()).unwrap()
    }

    fn split_of(lens: &[usize]) -> CorpusSplit {
        let trees: Vec<GoldTree> = lens.iter().map(|&n| chain(n)).collect();
        let vocab =
            Vocabulary::build(trees.iter().map(|t| {
                t.tokens().into_iter().map(|tok| tok.surface.as_str()).collect::<Vec<_>>()
            }), 10_000, 1)
            .unwrap();
        CorpusSplit::from_trees(SplitName::Dev, trees, &vocab)
    }

    #[test]
    fn wsj10_is_strictly_below_ten() {
        let s = split_of(&[9, 10, 3, 11]);
        let view = s.wsj10_view();
        assert_eq!(view.len(), 2);
        assert_eq!(view.sentences[0].0.len(), 9);
        assert_eq!(view.sentences[1].0.len(), 3);
    }

    #[test]
    fn wsj10_is_idempotent() {
        let s = split_of(&[2, 9, 10, 15]);
        let once = s.wsj10_view();
        let twice = once.wsj10_view();
        assert_eq!(once.len(), twice.len());
    }

    #[test]
    fn empty_split_gives_empty_view() {
        let s = CorpusSplit { name: SplitName::Dev, sentences: vec![] };
        assert!(s.wsj10_view().is_empty());
    }
}
