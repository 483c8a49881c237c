//! Dependency trees as produced by an external parser.

use super::GraphError;
use serde::{Deserialize, Serialize};

/// Graph-construction ruleset. French or Spanish text follows
/// [`Language::English`]; Japanese follows [`Language::Chinese`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "en")]
    English,
    #[serde(rename = "zh")]
    Chinese,
}

/// One token of a parsed sentence. `head` is the 1-based id of the
/// governing word, 0 for the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub id: usize,
    pub form: String,
    pub head: usize,
}

/// A validated dependency parse of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyTree {
    words: Vec<Word>,
    language: Language,
}

impl DependencyTree {
    /// Validate and wrap a word list. Ids must be exactly 1..=n in
    /// order, exactly one word must have head 0, every other head must
    /// point at a different existing word, and head chains must reach
    /// the root.
    pub fn new(words: Vec<Word>, language: Language) -> Result<Self, GraphError> {
        let fail = |msg: String| GraphError::InvalidTree {
            sentence: None,
            msg,
        };
        if words.is_empty() {
            return Err(fail("sentence has no words".into()));
        }
        let n = words.len();
        for (i, w) in words.iter().enumerate() {
            if w.id != i + 1 {
                return Err(fail(format!(
                    "ids must be exactly 1..{n} in order; position {} has id {}",
                    i + 1,
                    w.id
                )));
            }
            if w.form.is_empty() || w.form.contains('\t') || w.form.contains('\n') {
                return Err(fail(format!(
                    "word {} has an empty form or a form containing tab/newline",
                    w.id
                )));
            }
        }
        let roots: Vec<usize> = words.iter().filter(|w| w.head == 0).map(|w| w.id).collect();
        if roots.len() != 1 {
            return Err(fail(format!(
                "expected exactly one root (head = 0), found {}",
                roots.len()
            )));
        }
        for w in &words {
            if w.head != 0 {
                if w.head > n {
                    return Err(fail(format!(
                        "word {} has head {} outside 1..{n}",
                        w.id, w.head
                    )));
                }
                if w.head == w.id {
                    return Err(fail(format!("word {} is its own head", w.id)));
                }
            }
        }
        // Head chains must terminate at the root within n steps.
        for start in &words {
            let mut cur = start.head;
            let mut steps = 0;
            while cur != 0 {
                cur = words[cur - 1].head;
                steps += 1;
                if steps > n {
                    return Err(fail(format!(
                        "cyclic heads: word {} never reaches the root",
                        start.id
                    )));
                }
            }
        }
        Ok(DependencyTree { words, language })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// Number of words.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// 1-based id of the root word.
    pub fn root_id(&self) -> usize {
        self.words.iter().find(|w| w.head == 0).expect("validated").id
    }
}
