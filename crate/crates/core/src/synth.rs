//! Seeded PCFG corpus generator for desk-scale experiments: small vocabulary,
//! strongly structured sentences, gold trees included.

use crate::treebank::GoldTree;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DETS: &[&str] = &["the", "a", "every", "some", "no"];
const PRONOUNS: &[&str] = &["it", "she", "he", "somebody", "everyone"];
const NOUNS: &[&str] = &[
    "cat", "dog", "bird", "fox", "horse", "farmer", "teacher", "student", "child", "doctor",
    "river", "mountain", "garden", "house", "door", "letter", "story", "song", "window", "road",
    "apple", "stone", "tree", "boat", "cloud", "field", "market", "village", "king", "queen",
];
const VERBS: &[&str] = &[
    "sees", "finds", "follows", "likes", "helps", "watches", "chases", "greets", "hears",
    "carries", "paints", "builds", "opens", "closes", "reads", "writes", "sings", "visits",
    "remembers", "forgets",
];
const INTRANS_VERBS: &[&str] = &["sleeps", "arrives", "falls", "waits", "smiles", "runs"];
const ADJECTIVES: &[&str] = &[
    "old", "young", "red", "green", "small", "large", "quiet", "bright", "heavy", "soft",
    "strange", "happy",
];
const PREPOSITIONS: &[&str] = &["in", "on", "near", "under", "behind", "beside"];
const COMPLEMENTIZERS: &[&str] = &["that", "because", "if", "when"];

const MAX_DEPTH: usize = 6;
const MAX_TOKENS: usize = 18;

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words[rng.random_range(0..words.len())]
}

fn leaf(rng: &mut ChaCha8Rng, words: &[&str], pos: &str) -> GoldTree {
    GoldTree::leaf(pick(rng, words), pos, 0)
}

fn gen_np(rng: &mut ChaCha8Rng, depth: usize) -> GoldTree {
    let roll: f64 = rng.random();
    if roll < 0.12 {
        GoldTree::internal("NP", vec![leaf(rng, PRONOUNS, "PRP")])
    } else if roll < 0.62 || depth >= MAX_DEPTH {
        GoldTree::internal("NP", vec![leaf(rng, DETS, "DT"), leaf(rng, NOUNS, "NN")])
    } else if roll < 0.84 {
        GoldTree::internal(
            "NP",
            vec![leaf(rng, DETS, "DT"), gen_adjp(rng, depth + 1), leaf(rng, NOUNS, "NN")],
        )
    } else {
        let base = GoldTree::internal("NP", vec![leaf(rng, DETS, "DT"), leaf(rng, NOUNS, "NN")]);
        GoldTree::internal("NP", vec![base, gen_pp(rng, depth + 1)])
    }
}

fn gen_adjp(rng: &mut ChaCha8Rng, depth: usize) -> GoldTree {
    if depth < MAX_DEPTH && rng.random::<f64>() < 0.25 {
        GoldTree::internal("ADJP", vec![leaf(rng, ADJECTIVES, "JJ"), gen_adjp(rng, depth + 1)])
    } else {
        GoldTree::internal("ADJP", vec![leaf(rng, ADJECTIVES, "JJ")])
    }
}

fn gen_pp(rng: &mut ChaCha8Rng, depth: usize) -> GoldTree {
    GoldTree::internal("PP", vec![leaf(rng, PREPOSITIONS, "IN"), gen_np(rng, depth + 1)])
}

fn gen_vp(rng: &mut ChaCha8Rng, depth: usize) -> GoldTree {
    let roll: f64 = rng.random();
    if roll < 0.18 {
        GoldTree::internal("VP", vec![leaf(rng, INTRANS_VERBS, "VBZ")])
    } else if roll < 0.62 || depth >= MAX_DEPTH {
        GoldTree::internal("VP", vec![leaf(rng, VERBS, "VBZ"), gen_np(rng, depth + 1)])
    } else if roll < 0.80 {
        GoldTree::internal(
            "VP",
            vec![leaf(rng, VERBS, "VBZ"), gen_np(rng, depth + 1), gen_pp(rng, depth + 1)],
        )
    } else {
        GoldTree::internal("VP", vec![leaf(rng, VERBS, "VBZ"), gen_sbar(rng, depth + 1)])
    }
}

fn gen_sbar(rng: &mut ChaCha8Rng, depth: usize) -> GoldTree {
    GoldTree::internal(
        "SBAR",
        vec![leaf(rng, COMPLEMENTIZERS, "IN"), gen_s(rng, depth + 1)],
    )
}

fn gen_s(rng: &mut ChaCha8Rng, depth: usize) -> GoldTree {
    GoldTree::internal("S", vec![gen_np(rng, depth + 1), gen_vp(rng, depth + 1)])
}

/// One random sentence; resamples until the yield fits MAX_TOKENS.
pub fn generate_sentence(rng: &mut ChaCha8Rng) -> GoldTree {
    loop {
        let mut t = gen_s(rng, 0);
        if t.len() <= MAX_TOKENS {
            t.reindex();
            return t;
        }
    }
}

/// A reproducible corpus of `n` sentences with gold trees.
pub fn generate_corpus(n: usize, seed: u64) -> Vec<GoldTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| generate_sentence(&mut rng)).collect()
}

/// Total number of distinct terminals the grammar can emit.
pub fn vocabulary_size() -> usize {
    DETS.len()
        + PRONOUNS.len()
        + NOUNS.len()
        + VERBS.len()
        + INTRANS_VERBS.len()
        + ADJECTIVES.len()
        + PREPOSITIONS.len()
        + COMPLEMENTIZERS.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible() {
        let a = generate_corpus(50, 5);
        let b = generate_corpus(50, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn vocabulary_stays_small() {
        assert!(vocabulary_size() <= 200);
        let corpus = generate_corpus(500, 1);
        let mut types = std::collections::HashSet::new();
        for t in &corpus {
            for tok in t.tokens() {
                types.insert(tok.surface.clone());
            }
        }
        assert!(types.len() <= vocabulary_size());
    }

    #[test]
    fn sentences_are_bounded_and_well_formed() {
        for t in generate_corpus(200, 9) {
            assert!(t.len() >= 2);
            assert!(t.len() <= MAX_TOKENS);
            let toks = t.tokens();
            for (i, tok) in toks.iter().enumerate() {
                assert_eq!(tok.index, i);
            }
        }
    }

    #[test]
    fn some_sentences_contain_sbars() {
        let corpus = generate_corpus(300, 3);
        let mut found = 0;
        for t in &corpus {
            let rendered = t.render();
            if rendered.contains("(SBAR ") {
                found += 1;
            }
        }
        assert!(found > 10, "only {found} SBARs in 300 sentences");
    }
}
