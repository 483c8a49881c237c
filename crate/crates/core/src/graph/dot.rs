//! Graphviz DOT rendering of syntactic graphs.
//!
//! Forward edges draw solid, reversed edges dashed; intra-word edges
//! are green, dependency edges black. Node statements appear in node-id
//! order and edge statements in stored edge order, so output is
//! deterministic.

use super::syntactic::{NodeRole, SyntacticGraph};

/// Render one graph as a DOT `digraph`.
pub fn graph_to_dot(g: &SyntacticGraph) -> String {
    graph_to_dot_named(g, "syntactic_graph")
}

/// Render with an explicit graph name (used when a file holds several).
pub fn graph_to_dot_named(g: &SyntacticGraph, name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph {name} {{\n"));
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontsize=10];\n");
    for (i, role) in g.node_roles().iter().enumerate() {
        let label = match role {
            NodeRole::Bos => "BOS".to_string(),
            NodeRole::Eos => "EOS".to_string(),
            NodeRole::Unit => format!("u{}", g.unit_of_node(i).expect("unit node")),
        };
        debug_assert!(!label.is_empty());
        out.push_str(&format!("  n{i} [label=\"{label}\"];\n"));
    }
    for e in g.edges() {
        let style = if e.etype.is_forward() { "solid" } else { "dashed" };
        let color = if e.etype.is_intra() { "forestgreen" } else { "black" };
        out.push_str(&format!(
            "  n{} -> n{} [style={style}, color={color}];\n",
            e.src, e.dst
        ));
    }
    out.push_str("}\n");
    out
}
