//! Phoneme-to-word (and phoneme-to-character-to-word) alignment.

use super::tree::Language;
use super::GraphError;
use serde::{Deserialize, Serialize};

/// Character-level alignment carried by Chinese boundary maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharAlignment {
    pub char_of_phoneme: Vec<usize>,
    pub word_of_char: Vec<usize>,
}

/// Maps each phoneme to its word. Chinese maps additionally route
/// through characters: phoneme -> character -> word, and the
/// composition must agree with the direct phoneme -> word map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BoundaryRepr", into = "BoundaryRepr")]
pub struct BoundaryMap {
    language: Language,
    word_of_phoneme: Vec<usize>,
    chars: Option<CharAlignment>,
}

#[derive(Serialize, Deserialize)]
struct BoundaryRepr {
    language: Language,
    word_of_phoneme: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    char_of_phoneme: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    word_of_char: Option<Vec<usize>>,
}

impl TryFrom<BoundaryRepr> for BoundaryMap {
    type Error = GraphError;
    fn try_from(r: BoundaryRepr) -> Result<Self, GraphError> {
        match (r.language, r.char_of_phoneme, r.word_of_char) {
            (Language::English, None, None) => BoundaryMap::english(r.word_of_phoneme),
            (Language::English, _, _) => Err(GraphError::InvalidBoundary(
                "char_of_phoneme/word_of_char are only valid for language \"zh\"".into(),
            )),
            (Language::Chinese, Some(cp), Some(wc)) => {
                BoundaryMap::chinese(r.word_of_phoneme, cp, wc)
            }
            (Language::Chinese, _, _) => Err(GraphError::InvalidBoundary(
                "language \"zh\" requires both char_of_phoneme and word_of_char".into(),
            )),
        }
    }
}

impl From<BoundaryMap> for BoundaryRepr {
    fn from(b: BoundaryMap) -> BoundaryRepr {
        let (cp, wc) = match b.chars {
            Some(c) => (Some(c.char_of_phoneme), Some(c.word_of_char)),
            None => (None, None),
        };
        BoundaryRepr {
            language: b.language,
            word_of_phoneme: b.word_of_phoneme,
            char_of_phoneme: cp,
            word_of_char: wc,
        }
    }
}

/// Check that `xs` is non-decreasing, starts at 0, and never skips a
/// value, i.e. it is a surjection onto 0..=max with contiguous blocks.
fn check_blocked(name: &str, xs: &[usize]) -> Result<usize, GraphError> {
    if xs.is_empty() {
        return Err(GraphError::InvalidBoundary(format!("{name} is empty")));
    }
    if xs[0] != 0 {
        return Err(GraphError::InvalidBoundary(format!(
            "{name} must start at 0, found {}",
            xs[0]
        )));
    }
    for w in xs.windows(2) {
        if w[1] < w[0] || w[1] > w[0] + 1 {
            return Err(GraphError::InvalidBoundary(format!(
                "{name} must be non-decreasing without gaps, found {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(xs[xs.len() - 1] + 1)
}

impl BoundaryMap {
    /// English alignment: phonemes grouped directly into words.
    pub fn english(word_of_phoneme: Vec<usize>) -> Result<Self, GraphError> {
        check_blocked("word_of_phoneme", &word_of_phoneme)?;
        Ok(BoundaryMap {
            language: Language::English,
            word_of_phoneme,
            chars: None,
        })
    }

    /// Chinese alignment: phonemes group into characters, characters
    /// into words, and the two routes to words must agree.
    pub fn chinese(
        word_of_phoneme: Vec<usize>,
        char_of_phoneme: Vec<usize>,
        word_of_char: Vec<usize>,
    ) -> Result<Self, GraphError> {
        let n_words = check_blocked("word_of_phoneme", &word_of_phoneme)?;
        let n_chars = check_blocked("char_of_phoneme", &char_of_phoneme)?;
        let n_words_via_chars = check_blocked("word_of_char", &word_of_char)?;
        if char_of_phoneme.len() != word_of_phoneme.len() {
            return Err(GraphError::InvalidBoundary(format!(
                "char_of_phoneme has {} entries but word_of_phoneme has {}",
                char_of_phoneme.len(),
                word_of_phoneme.len()
            )));
        }
        if word_of_char.len() != n_chars {
            return Err(GraphError::InvalidBoundary(format!(
                "word_of_char has {} entries but char_of_phoneme references {} characters",
                word_of_char.len(),
                n_chars
            )));
        }
        if n_words_via_chars != n_words {
            return Err(GraphError::InvalidBoundary(format!(
                "word_of_char covers {n_words_via_chars} words but word_of_phoneme covers {n_words}"
            )));
        }
        for (i, &c) in char_of_phoneme.iter().enumerate() {
            if word_of_char[c] != word_of_phoneme[i] {
                return Err(GraphError::InvalidBoundary(format!(
                    "phoneme {i}: word_of_char[char_of_phoneme[{i}]] = {} disagrees with \
                     word_of_phoneme[{i}] = {}",
                    word_of_char[c], word_of_phoneme[i]
                )));
            }
        }
        Ok(BoundaryMap {
            language: Language::Chinese,
            word_of_phoneme,
            chars: Some(CharAlignment {
                char_of_phoneme,
                word_of_char,
            }),
        })
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn num_phonemes(&self) -> usize {
        self.word_of_phoneme.len()
    }

    pub fn num_words(&self) -> usize {
        self.word_of_phoneme[self.word_of_phoneme.len() - 1] + 1
    }

    /// Character count; `None` for English maps.
    pub fn num_chars(&self) -> Option<usize> {
        self.chars
            .as_ref()
            .map(|c| c.word_of_char.len())
    }

    pub fn word_of_phoneme(&self) -> &[usize] {
        &self.word_of_phoneme
    }

    pub fn char_alignment(&self) -> Option<&CharAlignment> {
        self.chars.as_ref()
    }

    /// Phoneme count of each word, in word order.
    pub fn phonemes_per_word(&self) -> Vec<usize> {
        counts_of_blocked(&self.word_of_phoneme, self.num_words())
    }

    /// Phoneme count of each character (Chinese only).
    pub fn phonemes_per_char(&self) -> Option<Vec<usize>> {
        let c = self.chars.as_ref()?;
        Some(counts_of_blocked(
            &c.char_of_phoneme,
            c.word_of_char.len(),
        ))
    }

    /// Character count of each word (Chinese only).
    pub fn chars_per_word(&self) -> Option<Vec<usize>> {
        let c = self.chars.as_ref()?;
        Some(counts_of_blocked(&c.word_of_char, self.num_words()))
    }

    /// Number of pooled units this map yields: words for English,
    /// characters for Chinese.
    pub fn num_units(&self) -> usize {
        match &self.chars {
            None => self.num_words(),
            Some(c) => c.word_of_char.len(),
        }
    }

    /// Phoneme count of each pooled unit, in unit order.
    pub fn phonemes_per_unit(&self) -> Vec<usize> {
        match self.phonemes_per_char() {
            Some(per_char) => per_char,
            None => self.phonemes_per_word(),
        }
    }
}

fn counts_of_blocked(xs: &[usize], groups: usize) -> Vec<usize> {
    let mut counts = vec![0usize; groups];
    for &x in xs {
        counts[x] += 1;
    }
    counts
}
