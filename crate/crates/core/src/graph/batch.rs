//! Merging sentence graphs into one block-diagonal graph and splitting
//! results back into per-sentence pieces.

use super::syntactic::{Edge, NodeRole, SyntacticGraph};
use super::GraphError;
use crate::num::{ops, Tensor};

/// Several sentence graphs packed into one. Node ids of graph `k` are
/// shifted by `offsets[k]`, unit indices by the number of units in
/// earlier graphs, so node and pooled-encoding rows concatenate in
/// order. No edge crosses two constituent graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchedGraph {
    merged: SyntacticGraph,
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    unit_counts: Vec<usize>,
    edge_counts: Vec<usize>,
}

/// Pack a non-empty list of graphs into one [`BatchedGraph`].
pub fn merge_graphs(graphs: &[SyntacticGraph]) -> Result<BatchedGraph, GraphError> {
    if graphs.is_empty() {
        return Err(GraphError::InvalidGraph(
            "cannot merge an empty graph list".into(),
        ));
    }
    let mut roles = Vec::new();
    let mut unit_index = Vec::new();
    let mut edges = Vec::new();
    let mut offsets = Vec::with_capacity(graphs.len());
    let mut sizes = Vec::with_capacity(graphs.len());
    let mut unit_counts = Vec::with_capacity(graphs.len());
    let mut edge_counts = Vec::with_capacity(graphs.len());
    let mut node_offset = 0;
    let mut unit_offset = 0;
    for g in graphs {
        offsets.push(node_offset);
        sizes.push(g.num_nodes());
        unit_counts.push(g.num_units());
        edge_counts.push(g.edges().len());
        roles.extend_from_slice(g.node_roles());
        unit_index.extend(g.unit_index().iter().map(|&u| u + unit_offset));
        edges.extend(
            g.edges()
                .iter()
                .map(|e| Edge::new(e.src + node_offset, e.dst + node_offset, e.etype)),
        );
        node_offset += g.num_nodes();
        unit_offset += g.num_units();
    }
    Ok(BatchedGraph {
        merged: SyntacticGraph::from_parts_unchecked(roles, unit_index, edges),
        offsets,
        sizes,
        unit_counts,
        edge_counts,
    })
}

impl BatchedGraph {
    /// The integrated graph the convolution runs on.
    pub fn merged(&self) -> &SyntacticGraph {
        &self.merged
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn unit_counts(&self) -> &[usize] {
        &self.unit_counts
    }

    pub fn num_graphs(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.merged.num_nodes()
    }

    pub fn total_units(&self) -> usize {
        self.merged.num_units()
    }

    /// Exact inverse of [`merge_graphs`].
    pub fn split_graphs(&self) -> Vec<SyntacticGraph> {
        let mut out = Vec::with_capacity(self.num_graphs());
        let mut edge_start = 0;
        let mut unit_offset = 0;
        for k in 0..self.num_graphs() {
            let node_lo = self.offsets[k];
            let roles = self.merged.node_roles()[node_lo..node_lo + self.sizes[k]].to_vec();
            let units = self.unit_counts[k];
            let unit_index: Vec<usize> = self.merged.unit_index()
                [unit_offset_range(&self.unit_counts, k)]
            .iter()
            .map(|&u| u - unit_offset)
            .collect();
            let edges: Vec<Edge> = self.merged.edges()[edge_start..edge_start + self.edge_counts[k]]
                .iter()
                .map(|e| Edge::new(e.src - node_lo, e.dst - node_lo, e.etype))
                .collect();
            edge_start += self.edge_counts[k];
            unit_offset += units;
            out.push(SyntacticGraph::from_parts_unchecked(
                roles, unit_index, edges,
            ));
        }
        out
    }

    /// Split a per-node matrix of the merged graph back into per-graph
    /// row blocks.
    pub fn split_node_matrix(&self, mat: &Tensor) -> Result<Vec<Tensor>, GraphError> {
        let (rows, _) = mat.expect_matrix("split_node_matrix")?;
        if rows != self.total_nodes() {
            return Err(GraphError::Shape(crate::num::NumError::ShapeMismatch {
                op: "split_node_matrix",
                lhs: mat.shape().to_vec(),
                rhs: vec![self.total_nodes(), mat.shape()[1]],
            }));
        }
        Ok(ops::split_rows(mat, &self.sizes)?)
    }

    /// Split a per-unit matrix (pooled-encoding rows) into per-graph
    /// row blocks.
    pub fn split_unit_matrix(&self, mat: &Tensor) -> Result<Vec<Tensor>, GraphError> {
        let (rows, _) = mat.expect_matrix("split_unit_matrix")?;
        if rows != self.total_units() {
            return Err(GraphError::Shape(crate::num::NumError::ShapeMismatch {
                op: "split_unit_matrix",
                lhs: mat.shape().to_vec(),
                rhs: vec![self.total_units(), mat.shape()[1]],
            }));
        }
        Ok(ops::split_rows(mat, &self.unit_counts)?)
    }

    /// Structural validation of the batch: per-graph pieces are valid
    /// sentence graphs and no edge crosses a boundary.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.offsets.first() != Some(&0) {
            return Err(GraphError::InvalidGraph("offsets must start at 0".into()));
        }
        for k in 0..self.num_graphs() - 1 {
            if self.offsets[k + 1] != self.offsets[k] + self.sizes[k] {
                return Err(GraphError::InvalidGraph(
                    "offsets must accumulate sizes".into(),
                ));
            }
        }
        let bounds: Vec<(usize, usize)> = self
            .offsets
            .iter()
            .zip(&self.sizes)
            .map(|(&o, &s)| (o, o + s))
            .collect();
        for e in self.merged.edges() {
            let home = bounds
                .iter()
                .position(|&(lo, hi)| e.src >= lo && e.src < hi)
                .ok_or_else(|| GraphError::InvalidGraph("edge source outside any graph".into()))?;
            let (lo, hi) = bounds[home];
            if e.dst < lo || e.dst >= hi {
                return Err(GraphError::InvalidGraph(format!(
                    "edge ({}, {}) crosses graph boundaries",
                    e.src, e.dst
                )));
            }
        }
        for g in self.split_graphs() {
            g.validate()?;
        }
        let sentinels = self
            .merged
            .node_roles()
            .iter()
            .filter(|r| **r == NodeRole::Bos)
            .count();
        if sentinels != self.num_graphs() {
            return Err(GraphError::InvalidGraph(
                "merged graph must carry one BOS per constituent".into(),
            ));
        }
        Ok(())
    }
}

fn unit_offset_range(unit_counts: &[usize], k: usize) -> std::ops::Range<usize> {
    let start: usize = unit_counts[..k].iter().sum();
    start..start + unit_counts[k]
}
