//! Binary parse induction: convert master-gate heights (or random numbers)
//! into unlabeled binary trees by recursively splitting at the highest
//! split point.

mod heights;
mod parse;
mod random;

pub use heights::{heights_from_trace, HeightVector};
pub use parse::{build_tree, parse_corpus, BinaryParse, TieBreak};
pub use random::random_parse;

use crate::error::Result;
use crate::model::Checkpoint;
use crate::treebank::CorpusSplit;

/// Parse every sentence of a split with a checkpoint, returning the trees
/// together with their height vectors.
pub fn parse_corpus_with_heights(
    checkpoint: &Checkpoint,
    split: &CorpusSplit,
    layer: usize,
) -> Result<Vec<(BinaryParse, HeightVector)>> {
    parse::parse_corpus_impl(checkpoint, split, layer)
}
