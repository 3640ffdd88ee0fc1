use crate::induction::parse::{build_tree, BinaryParse, TieBreak};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Random-baseline parse: the height-ordered splitting algorithm run on a
/// uniformly random permutation of n-1 distinct heights, i.e. split points
/// chosen in a random order.
pub fn random_parse(n: usize, rng: &mut ChaCha8Rng) -> BinaryParse {
    assert!(n >= 1, "sentence must have at least one token");
    if n == 1 {
        return BinaryParse::Leaf(0);
    }
    let mut heights: Vec<f64> = (0..n - 1).map(|k| k as f64).collect();
    heights.shuffle(rng);
    build_tree(&heights, TieBreak::Leftmost)
}
