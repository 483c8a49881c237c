//! The syntactic graph and its two construction rules.

use super::boundary::BoundaryMap;
use super::tree::{DependencyTree, Language};
use super::GraphError;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Node kinds: sentinels plus the pooled units (words for English,
/// characters for Chinese).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRole {
    #[serde(rename = "BOS")]
    Bos,
    #[serde(rename = "EOS")]
    Eos,
    #[serde(rename = "U")]
    Unit,
}

/// Heterogeneous edge types. English graphs use only the dependency
/// pair; Chinese graphs add the intra-word pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    #[serde(rename = "DF")]
    DepForward,
    #[serde(rename = "DR")]
    DepReverse,
    #[serde(rename = "IF")]
    IntraForward,
    #[serde(rename = "IR")]
    IntraReverse,
}

impl EdgeType {
    /// The paired type carrying the same connection in the opposite
    /// direction.
    pub fn reversed(self) -> EdgeType {
        match self {
            EdgeType::DepForward => EdgeType::DepReverse,
            EdgeType::DepReverse => EdgeType::DepForward,
            EdgeType::IntraForward => EdgeType::IntraReverse,
            EdgeType::IntraReverse => EdgeType::IntraForward,
        }
    }

    pub fn is_forward(self) -> bool {
        matches!(self, EdgeType::DepForward | EdgeType::IntraForward)
    }

    pub fn is_intra(self) -> bool {
        matches!(self, EdgeType::IntraForward | EdgeType::IntraReverse)
    }

    /// Short code used in JSON and parameter-bundle keys.
    pub fn code(self) -> &'static str {
        match self {
            EdgeType::DepForward => "DF",
            EdgeType::DepReverse => "DR",
            EdgeType::IntraForward => "IF",
            EdgeType::IntraReverse => "IR",
        }
    }

    /// Edge-type set a language's graphs may carry.
    pub fn set_for(language: Language) -> &'static [EdgeType] {
        match language {
            Language::English => &[EdgeType::DepForward, EdgeType::DepReverse],
            Language::Chinese => &[
                EdgeType::DepForward,
                EdgeType::DepReverse,
                EdgeType::IntraForward,
                EdgeType::IntraReverse,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub etype: EdgeType,
}

impl Edge {
    pub fn new(src: usize, dst: usize, etype: EdgeType) -> Self {
        Edge { src, dst, etype }
    }
}

/// A typed directed graph over one sentence: exactly one BOS, one EOS,
/// and unit nodes indexed into the pooled-encoding sequence. Node ids
/// are assigned deterministically: BOS = 0, units 1..=m in sentence
/// order, EOS = m + 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct SyntacticGraph {
    node_roles: Vec<NodeRole>,
    unit_index: Vec<usize>,
    edges: Vec<Edge>,
}

/// Wire form with a fixed field order:
/// `{"num_nodes":..,"roles":[..],"unit_index":[..],"edges":[[src,dst,code],..]}`.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    num_nodes: usize,
    roles: Vec<NodeRole>,
    unit_index: Vec<usize>,
    edges: Vec<(usize, usize, EdgeType)>,
}

impl TryFrom<GraphRepr> for SyntacticGraph {
    type Error = GraphError;
    fn try_from(r: GraphRepr) -> Result<Self, GraphError> {
        if r.num_nodes != r.roles.len() {
            return Err(GraphError::InvalidGraph(format!(
                "num_nodes = {} but roles has {} entries",
                r.num_nodes,
                r.roles.len()
            )));
        }
        let g = SyntacticGraph {
            node_roles: r.roles,
            unit_index: r.unit_index,
            edges: r
                .edges
                .into_iter()
                .map(|(src, dst, etype)| Edge { src, dst, etype })
                .collect(),
        };
        g.validate()?;
        Ok(g)
    }
}

impl From<SyntacticGraph> for GraphRepr {
    fn from(g: SyntacticGraph) -> GraphRepr {
        GraphRepr {
            num_nodes: g.node_roles.len(),
            roles: g.node_roles,
            unit_index: g.unit_index,
            edges: g.edges.into_iter().map(|e| (e.src, e.dst, e.etype)).collect(),
        }
    }
}

impl SyntacticGraph {
    /// Assemble from parts, enforcing every single-sentence invariant.
    pub fn new(
        node_roles: Vec<NodeRole>,
        unit_index: Vec<usize>,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        let g = SyntacticGraph {
            node_roles,
            unit_index,
            edges,
        };
        g.validate()?;
        Ok(g)
    }

    /// Construct without the single-BOS/EOS check; used by graph
    /// merging, which still enforces the structural edge invariants.
    pub(crate) fn from_parts_unchecked(
        node_roles: Vec<NodeRole>,
        unit_index: Vec<usize>,
        edges: Vec<Edge>,
    ) -> Self {
        SyntacticGraph {
            node_roles,
            unit_index,
            edges,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_roles.len()
    }

    pub fn num_units(&self) -> usize {
        self.unit_index.len()
    }

    pub fn node_roles(&self) -> &[NodeRole] {
        &self.node_roles
    }

    /// Pooled-sequence position of each unit node, in node order.
    pub fn unit_index(&self) -> &[usize] {
        &self.unit_index
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Node ids of unit nodes, in node order.
    pub fn unit_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.node_roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == NodeRole::Unit)
            .map(|(i, _)| i)
    }

    /// Pooled-sequence position of node `node`, if it is a unit.
    pub fn unit_of_node(&self, node: usize) -> Option<usize> {
        if self.node_roles.get(node) != Some(&NodeRole::Unit) {
            return None;
        }
        let nth = self.node_roles[..node]
            .iter()
            .filter(|r| **r == NodeRole::Unit)
            .count();
        self.unit_index.get(nth).copied()
    }

    /// Distinct edge types present, sorted.
    pub fn edge_types_present(&self) -> Vec<EdgeType> {
        let mut set: Vec<EdgeType> = self
            .edges
            .iter()
            .map(|e| e.etype)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        set.sort();
        set
    }

    /// Enforce the structural invariants shared by every sentence graph.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.node_roles.len();
        let bos = self.node_roles.iter().filter(|r| **r == NodeRole::Bos).count();
        let eos = self.node_roles.iter().filter(|r| **r == NodeRole::Eos).count();
        if bos != 1 || eos != 1 {
            return Err(GraphError::InvalidGraph(format!(
                "expected exactly one BOS and one EOS node, found {bos} and {eos}"
            )));
        }
        self.validate_edges_and_units(n)
    }

    /// The invariants that also hold for merged graphs (any number of
    /// sentinels): edge ranges, pairing, uniqueness, unit indexing.
    pub(crate) fn validate_edges_and_units(&self, n: usize) -> Result<(), GraphError> {
        let units = self
            .node_roles
            .iter()
            .filter(|r| **r == NodeRole::Unit)
            .count();
        if self.unit_index.len() != units {
            return Err(GraphError::InvalidGraph(format!(
                "{units} unit nodes but {} unit_index entries",
                self.unit_index.len()
            )));
        }
        let mut seen_units = vec![false; units];
        for &u in &self.unit_index {
            if u >= units || seen_units[u] {
                return Err(GraphError::InvalidGraph(format!(
                    "unit_index must be a permutation of 0..{units}"
                )));
            }
            seen_units[u] = true;
        }
        let mut seen_edges = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.src >= n || e.dst >= n {
                return Err(GraphError::InvalidGraph(format!(
                    "edge ({}, {}, {}) out of node range 0..{n}",
                    e.src,
                    e.dst,
                    e.etype.code()
                )));
            }
            if e.src == e.dst {
                return Err(GraphError::InvalidGraph(format!(
                    "self-loop at node {}",
                    e.src
                )));
            }
            if !seen_edges.insert((e.src, e.dst, e.etype)) {
                return Err(GraphError::InvalidGraph(format!(
                    "duplicate edge ({}, {}, {})",
                    e.src,
                    e.dst,
                    e.etype.code()
                )));
            }
        }
        // Forward/reverse pairing is a bijection for both edge families.
        for e in &self.edges {
            if !seen_edges.contains(&(e.dst, e.src, e.etype.reversed())) {
                return Err(GraphError::InvalidGraph(format!(
                    "edge ({}, {}, {}) has no {} twin",
                    e.src,
                    e.dst,
                    e.etype.code(),
                    e.etype.reversed().code()
                )));
            }
        }
        Ok(())
    }
}

/// English rule: one unit node per word, each dependency edge doubled
/// with a reverse twin, BOS paired with the first word and EOS with the
/// last.
pub fn build_english_graph(
    tree: &DependencyTree,
    boundary: &BoundaryMap,
) -> Result<SyntacticGraph, GraphError> {
    if tree.language() != Language::English || boundary.language() != Language::English {
        return Err(GraphError::Alignment(
            "English graph construction requires an English tree and boundary".into(),
        ));
    }
    let n = tree.len();
    if boundary.num_words() != n {
        return Err(GraphError::Alignment(format!(
            "tree has {n} words but boundary map covers {}",
            boundary.num_words()
        )));
    }
    // BOS = 0, word k (0-based) = k + 1, EOS = n + 1
    let node_of_word = |word0: usize| word0 + 1;
    let mut roles = vec![NodeRole::Unit; n + 2];
    roles[0] = NodeRole::Bos;
    roles[n + 1] = NodeRole::Eos;
    let unit_index: Vec<usize> = (0..n).collect();

    let mut edges = Vec::with_capacity(2 * (n - 1) + 4);
    push_pair(&mut edges, 0, node_of_word(0), EdgeType::DepForward);
    for w in tree.words() {
        if w.head != 0 {
            push_pair(
                &mut edges,
                node_of_word(w.head - 1),
                node_of_word(w.id - 1),
                EdgeType::DepForward,
            );
        }
    }
    push_pair(&mut edges, node_of_word(n - 1), n + 1, EdgeType::DepForward);
    let g = SyntacticGraph {
        node_roles: roles,
        unit_index,
        edges,
    };
    debug_assert!(g.validate().is_ok());
    Ok(g)
}

/// Chinese rule: one unit node per character; the first characters of
/// head and dependent words carry the doubled dependency edges; the
/// characters of each word form an intra-word chain with its own
/// forward/reverse pair; BOS pairs with the first character of the
/// first word and EOS with the last character of the last word.
pub fn build_chinese_graph(
    tree: &DependencyTree,
    boundary: &BoundaryMap,
) -> Result<SyntacticGraph, GraphError> {
    if tree.language() != Language::Chinese || boundary.language() != Language::Chinese {
        return Err(GraphError::Alignment(
            "Chinese graph construction requires a Chinese tree and boundary".into(),
        ));
    }
    let n = tree.len();
    if boundary.num_words() != n {
        return Err(GraphError::Alignment(format!(
            "tree has {n} words but boundary map covers {}",
            boundary.num_words()
        )));
    }
    let chars_per_word = boundary
        .chars_per_word()
        .ok_or_else(|| GraphError::Alignment("Chinese boundary lacks character alignment".into()))?;
    if let Some(w) = chars_per_word.iter().position(|&k| k == 0) {
        return Err(GraphError::Alignment(format!(
            "word {w} owns no characters"
        )));
    }
    let total_chars: usize = chars_per_word.iter().sum();
    // first character (0-based, in the character sequence) of each word
    let mut first_char = Vec::with_capacity(n);
    let mut acc = 0;
    for &k in &chars_per_word {
        first_char.push(acc);
        acc += k;
    }
    // BOS = 0, character j = j + 1, EOS = total_chars + 1
    let node_of_char = |c: usize| c + 1;

    let mut roles = vec![NodeRole::Unit; total_chars + 2];
    roles[0] = NodeRole::Bos;
    roles[total_chars + 1] = NodeRole::Eos;
    let unit_index: Vec<usize> = (0..total_chars).collect();

    let mut edges = Vec::new();
    push_pair(&mut edges, 0, node_of_char(0), EdgeType::DepForward);
    for (w0, word) in tree.words().iter().enumerate() {
        if word.head != 0 {
            push_pair(
                &mut edges,
                node_of_char(first_char[word.head - 1]),
                node_of_char(first_char[w0]),
                EdgeType::DepForward,
            );
        }
        for c in first_char[w0]..first_char[w0] + chars_per_word[w0] - 1 {
            push_pair(
                &mut edges,
                node_of_char(c),
                node_of_char(c + 1),
                EdgeType::IntraForward,
            );
        }
    }
    push_pair(
        &mut edges,
        node_of_char(total_chars - 1),
        total_chars + 1,
        EdgeType::DepForward,
    );
    let g = SyntacticGraph {
        node_roles: roles,
        unit_index,
        edges,
    };
    debug_assert!(g.validate().is_ok());
    Ok(g)
}

fn push_pair(edges: &mut Vec<Edge>, src: usize, dst: usize, forward: EdgeType) {
    edges.push(Edge::new(src, dst, forward));
    edges.push(Edge::new(dst, src, forward.reversed()));
}
