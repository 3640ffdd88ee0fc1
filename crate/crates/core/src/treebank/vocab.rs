use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const UNK_SYMBOL: &str = "<unk>";
pub const EOS_SYMBOL: &str = "<eos>";
pub const UNK_ID: usize = 0;
pub const EOS_ID: usize = 1;
const NUM_RESERVED: usize = 2;

/// Token-to-id mapping with reserved unknown-word and end-of-sentence ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    /// id -> surface, reserved symbols first.
    tokens: Vec<String>,
    /// surface -> id over non-reserved entries.
    ids: HashMap<String, usize>,
    /// id -> training-corpus frequency (reserved ids count occurrences mapped to them).
    counts: Vec<u64>,
}

impl Vocabulary {
    /// Build from training sentences. The most frequent types are kept up to
    /// `max_size` total entries (reserved included); ties break
    /// lexicographically. Types seen fewer than `min_freq` times map to unk.
    pub fn build<'a, I, S>(sentences: I, max_size: usize, min_freq: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a str>,
    {
        if max_size < NUM_RESERVED {
            return Err(Error::Config(format!(
                "vocabulary max_size must be >= {NUM_RESERVED}"
            )));
        }
        let mut freq: HashMap<String, u64> = HashMap::new();
        let mut total_sentences = 0u64;
        let mut total_tokens = 0u64;
        for sent in sentences {
            total_sentences += 1;
            for tok in sent {
                *freq.entry(tok.to_string()).or_insert(0) += 1;
                total_tokens += 1;
            }
        }
        if total_sentences == 0 || total_tokens == 0 {
            return Err(Error::EmptyCorpus);
        }

        let mut entries: Vec<(String, u64)> =
            freq.into_iter().filter(|(_, c)| *c >= min_freq).collect();
        // Highest frequency first, lexicographic within a frequency.
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(max_size - NUM_RESERVED);

        let mut tokens = vec![UNK_SYMBOL.to_string(), EOS_SYMBOL.to_string()];
        let mut counts = vec![0u64, total_sentences];
        let mut ids = HashMap::new();
        let mut kept_tokens = 0u64;
        for (tok, c) in entries {
            ids.insert(tok.clone(), tokens.len());
            tokens.push(tok);
            counts.push(c);
            kept_tokens += c;
        }
        counts[UNK_ID] = total_tokens - kept_tokens;
        Ok(Vocabulary { tokens, ids, counts })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id_of(&self, surface: &str) -> usize {
        self.ids.get(surface).copied().unwrap_or(UNK_ID)
    }

    pub fn surface_of(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(|s| s.as_str())
    }

    pub fn count_of(&self, id: usize) -> u64 {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn encode<'a, I: IntoIterator<Item = &'a str>>(&self, sentence: I) -> Vec<usize> {
        sentence.into_iter().map(|t| self.id_of(t)).collect()
    }

    /// "token<TAB>id<TAB>count" lines, reserved symbols first.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, tok) in self.tokens.iter().enumerate() {
            out.push_str(&format!("{tok}\t{id}\t{}\n", self.counts[id]));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut counts = Vec::new();
        let mut ids = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (tok, id, count) = (parts.next(), parts.next(), parts.next());
            match (tok, id, count) {
                (Some(tok), Some(id), Some(count)) => {
                    let id: usize = id
                        .parse()
                        .map_err(|_| Error::Config(format!("bad vocab id on line {}", lineno + 1)))?;
                    if id != tokens.len() {
                        return Err(Error::Config(format!(
                            "vocab ids must be contiguous, got {id} on line {}",
                            lineno + 1
                        )));
                    }
                    if id >= NUM_RESERVED {
                        ids.insert(tok.to_string(), id);
                    }
                    tokens.push(tok.to_string());
                    counts.push(count.parse().unwrap_or(0));
                }
                _ => {
                    return Err(Error::Config(format!("bad vocab line {}", lineno + 1)));
                }
            }
        }
        if tokens.len() < NUM_RESERVED {
            return Err(Error::Config("vocabulary file missing reserved symbols".into()));
        }
        Ok(Vocabulary { tokens, ids, counts })
    }
}
