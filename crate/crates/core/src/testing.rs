//! Seeded generators for random valid structures, shared by the test
//! suites and the CLI's self-test command.

use crate::graph::{BoundaryMap, DependencyTree, Language, Word};
use crate::num::Rng;

/// Random valid dependency tree: a random permutation's first element
/// becomes the root and every later element attaches to some earlier
/// one, which guarantees acyclicity with ids 1..=n intact.
pub fn random_tree(n: usize, language: Language, rng: &mut Rng) -> DependencyTree {
    assert!(n >= 1);
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.below(i + 1));
    }
    let mut heads = vec![0usize; n + 1];
    for i in 1..n {
        heads[order[i]] = order[rng.below(i)];
    }
    heads[order[0]] = 0;
    let words = (1..=n)
        .map(|id| Word {
            id,
            form: format!("w{id}"),
            head: heads[id],
        })
        .collect();
    DependencyTree::new(words, language).expect("construction is valid")
}

/// Random English boundary: 1..=max_phonemes phonemes per word.
pub fn random_english_boundary(n_words: usize, max_phonemes: usize, rng: &mut Rng) -> BoundaryMap {
    let mut wop = Vec::new();
    for w in 0..n_words {
        for _ in 0..1 + rng.below(max_phonemes) {
            wop.push(w);
        }
    }
    BoundaryMap::english(wop).expect("valid by construction")
}

/// Random Chinese boundary: 1..=max_chars characters per word and
/// 1..=max_phonemes phonemes per character.
pub fn random_chinese_boundary(
    n_words: usize,
    max_chars: usize,
    max_phonemes: usize,
    rng: &mut Rng,
) -> BoundaryMap {
    let mut word_of_char = Vec::new();
    for w in 0..n_words {
        for _ in 0..1 + rng.below(max_chars) {
            word_of_char.push(w);
        }
    }
    let mut char_of_phoneme = Vec::new();
    let mut word_of_phoneme = Vec::new();
    for (c, &w) in word_of_char.iter().enumerate() {
        for _ in 0..1 + rng.below(max_phonemes) {
            char_of_phoneme.push(c);
            word_of_phoneme.push(w);
        }
    }
    BoundaryMap::chinese(word_of_phoneme, char_of_phoneme, word_of_char)
        .expect("valid by construction")
}
