//! PTB-style treebank ingestion: bracketed-format reading, normalization,
//! vocabularies, and corpus splits.

mod corpus;
mod normalize;
mod reader;
mod tree;
mod vocab;

pub use corpus::{CorpusSplit, SplitName};
pub use normalize::{normalize_tree, NormalizationPolicy, PUNCTUATION_TAGS, TRACE_TAG};
pub use reader::parse_ptb;
pub use tree::{GoldTree, Span, Token};
pub use vocab::{Vocabulary, EOS_ID, EOS_SYMBOL, UNK_ID, UNK_SYMBOL};
