//! CoNLL-U reading and canonical re-serialization.
//!
//! Only columns 1 (ID), 2 (FORM), and 7 (HEAD) are consumed; comment
//! lines are skipped and blank lines separate sentences. Multiword
//! token ranges (`3-4`) and empty nodes (`3.1`) are rejected as
//! unsupported rather than silently dropped.

use super::tree::{DependencyTree, Language, Word};
use super::GraphError;

/// Parse a CoNLL-U document into one validated tree per sentence.
pub fn parse_conllu(text: &str, language: Language) -> Result<Vec<DependencyTree>, GraphError> {
    let mut trees = Vec::new();
    let mut words: Vec<Word> = Vec::new();
    let flush = |words: &mut Vec<Word>,
                 trees: &mut Vec<DependencyTree>|
     -> Result<(), GraphError> {
        if words.is_empty() {
            return Ok(());
        }
        let sentence_index = trees.len();
        let tree = DependencyTree::new(std::mem::take(words), language)
            .map_err(|e| e.with_sentence(sentence_index))?;
        trees.push(tree);
        Ok(())
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        if raw.trim().is_empty() {
            flush(&mut words, &mut trees)?;
            continue;
        }
        if raw.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 10 {
            return Err(GraphError::ConlluParse {
                line,
                msg: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id_field = cols[0];
        if id_field.contains('-') {
            return Err(GraphError::Unsupported {
                line,
                what: format!("multiword token range id '{id_field}'"),
            });
        }
        if id_field.contains('.') {
            return Err(GraphError::Unsupported {
                line,
                what: format!("empty node id '{id_field}'"),
            });
        }
        let id: usize = id_field.parse().map_err(|_| GraphError::ConlluParse {
            line,
            msg: format!("ID must be a positive integer, found '{id_field}'"),
        })?;
        if id == 0 {
            return Err(GraphError::ConlluParse {
                line,
                msg: "ID must be >= 1".into(),
            });
        }
        let form = cols[1];
        if form.is_empty() {
            return Err(GraphError::ConlluParse {
                line,
                msg: "FORM must be non-empty".into(),
            });
        }
        let head_field = cols[6];
        let head: usize = head_field.parse().map_err(|_| GraphError::ConlluParse {
            line,
            msg: format!("HEAD must be a non-negative integer, found '{head_field}'"),
        })?;
        words.push(Word {
            id,
            form: form.to_string(),
            head,
        });
    }
    flush(&mut words, &mut trees)?;
    Ok(trees)
}

/// Canonical CoNLL-U form: the three consumed columns filled in, every
/// other column `_`, a blank line after each sentence. Parsing the
/// output and re-serializing reproduces it byte for byte.
pub fn serialize_conllu(trees: &[DependencyTree]) -> String {
    let mut out = String::new();
    for tree in trees {
        for w in tree.words() {
            out.push_str(&format!(
                "{}\t{}\t_\t_\t_\t_\t{}\t_\t_\t_\n",
                w.id, w.form, w.head
            ));
        }
        out.push('\n');
    }
    out
}
