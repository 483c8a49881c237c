//! Dependency-tree ingestion and syntactic graph construction.
//!
//! A parsed sentence enters as a [`DependencyTree`] plus a
//! [`BoundaryMap`] aligning phonemes to words (and, for Chinese,
//! phonemes to characters to words). The builders turn the pair into a
//! [`SyntacticGraph`]: one unit node per word (English) or per
//! character (Chinese), each dependency edge doubled with a reverse
//! twin, BOS/EOS sentinels at the ends, and intra-word chains for
//! Chinese. Graph lists can be merged into one block-diagonal graph for
//! batched convolution and split back exactly.

pub mod batch;
pub mod boundary;
pub mod conllu;
pub mod dot;
pub mod syntactic;
pub mod tree;

pub use batch::{merge_graphs, BatchedGraph};
pub use boundary::BoundaryMap;
pub use conllu::{parse_conllu, serialize_conllu};
pub use dot::{graph_to_dot, graph_to_dot_named};
pub use syntactic::{
    build_chinese_graph, build_english_graph, Edge, EdgeType, NodeRole, SyntacticGraph,
};
pub use tree::{DependencyTree, Language, Word};

use thiserror::Error;

/// Errors from parsing, validation, and graph construction.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    ConlluParse { line: usize, msg: String },
    #[error("line {line}: unsupported CoNLL-U feature: {what}")]
    Unsupported { line: usize, what: String },
    #[error("{}invalid dependency tree: {msg}",
            sentence.map(|s| format!("sentence {s}: ")).unwrap_or_default())]
    InvalidTree { sentence: Option<usize>, msg: String },
    #[error("invalid boundary map: {0}")]
    InvalidBoundary(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("invalid syntactic graph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Shape(#[from] crate::num::NumError),
}

impl GraphError {
    /// Attach a 0-based sentence index to a tree-validation error.
    pub(crate) fn with_sentence(self, sentence: usize) -> Self {
        match self {
            GraphError::InvalidTree { msg, .. } => GraphError::InvalidTree {
                sentence: Some(sentence),
                msg,
            },
            other => other,
        }
    }
}
