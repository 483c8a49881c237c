//! build-graph: CoNLL-U + boundary maps -> syntactic graph file.

use crate::config::{Config, ConfigFlags};
use crate::io::{self, SentenceRecord};
use crate::{CliError, LangArg};
use prosograph::graph::{
    build_chinese_graph, build_english_graph, graph_to_dot_named, parse_conllu, BoundaryMap,
    Language,
};
use std::path::Path;

pub fn run(
    flags: &ConfigFlags,
    lang: LangArg,
    conllu_path: &Path,
    boundary_path: &Path,
    out_path: &Path,
    dot_path: Option<&Path>,
) -> Result<(), CliError> {
    let language: Language = lang.into();
    let text = io::read_to_string(conllu_path)?;
    let trees = parse_conllu(&text, language)
        .map_err(|e| CliError::Input(format!("{}: {e}", conllu_path.display())))?;
    if trees.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no sentences found",
            conllu_path.display()
        )));
    }
    let boundaries: Vec<BoundaryMap> = io::read_one_or_many(boundary_path)?;
    if boundaries.len() != trees.len() {
        return Err(CliError::Input(format!(
            "{}: {} boundary maps for {} sentences",
            boundary_path.display(),
            boundaries.len(),
            trees.len()
        )));
    }
    let mut sentences = Vec::with_capacity(trees.len());
    for (i, (tree, boundary)) in trees.iter().zip(&boundaries).enumerate() {
        if boundary.language() != language {
            return Err(CliError::Input(format!(
                "{}: sentence {i}: boundary language does not match --lang",
                boundary_path.display()
            )));
        }
        let graph = match language {
            Language::English => build_english_graph(tree, boundary),
            Language::Chinese => build_chinese_graph(tree, boundary),
        }
        .map_err(|e| {
            CliError::Input(format!("{}: sentence {i}: {e}", conllu_path.display()))
        })?;
        sentences.push(SentenceRecord {
            graph,
            boundary: boundary.clone(),
        });
    }
    if let Some(dot) = dot_path {
        let mut text = String::new();
        for (i, s) in sentences.iter().enumerate() {
            text.push_str(&graph_to_dot_named(&s.graph, &format!("g{i}")));
        }
        std::fs::write(dot, text)
            .map_err(|e| CliError::Input(format!("{}: {e}", dot.display())))?;
    }
    let config = Config::resolve(flags, Some(language));
    io::write_json(out_path, &io::graph_file(config, sentences))
}
