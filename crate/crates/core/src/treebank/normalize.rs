use crate::error::{Error, Result};
use crate::treebank::GoldTree;
use serde::{Deserialize, Serialize};

/// POS tag marking PTB trace / empty elements.
pub const TRACE_TAG: &str = "-NONE-";

/// PTB punctuation POS tags.
pub const PUNCTUATION_TAGS: &[&str] =
    &[".", ",", ":", "``", "''", "-LRB-", "-RRB-", "#", "$"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    /// Remove leaves whose POS is a PTB punctuation tag.
    pub drop_punctuation: bool,
    /// Strip functional annotation suffixes ("-SBJ", "=2") from labels.
    pub strip_label_suffixes: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy { drop_punctuation: true, strip_label_suffixes: true }
    }
}

/// Strip everything from the first `-` or `=` of a nonterminal label.
/// Labels that would become empty (leading `-`) are kept verbatim.
pub fn strip_label(label: &str) -> &str {
    match label.find(['-', '=']) {
        Some(0) | None => label,
        Some(i) => &label[..i],
    }
}

/// Remove traces and (optionally) punctuation, strip label suffixes, and
/// re-pack token indices. Errors with [`Error::DegenerateSentence`] when the
/// yield becomes empty.
pub fn normalize_tree(tree: &GoldTree, policy: &NormalizationPolicy) -> Result<GoldTree> {
    let mut out = prune(tree, policy).ok_or(Error::DegenerateSentence)?;
    out.reindex();
    Ok(out)
}

fn prune(tree: &GoldTree, policy: &NormalizationPolicy) -> Option<GoldTree> {
    match tree {
        GoldTree::Leaf { token } => {
            if token.pos == TRACE_TAG {
                return None;
            }
            if policy.drop_punctuation && PUNCTUATION_TAGS.contains(&token.pos.as_str()) {
                return None;
            }
            Some(GoldTree::Leaf { token: token.clone() })
        }
        GoldTree::Internal { label, children } => {
            let kept: Vec<GoldTree> = children.iter().filter_map(|c| prune(c, policy)).collect();
            if kept.is_empty() {
                return None;
            }
            let label = if policy.strip_label_suffixes {
                strip_label(label).to_string()
            } else {
                label.clone()
            };
            Some(GoldTree::Internal { label, children: kept })
        }
    }
}
