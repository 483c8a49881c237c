//! The syntactic graph encoder.
//!
//! Phoneme encodings are average-pooled per unit (word for English,
//! character for Chinese) to become node embeddings, propagated through
//! stacked gated graph convolution layers, and the layer outputs are
//! summed into the unit-level syntactic encoding. The pooled input is
//! detached: gradients never flow back into the phoneme encodings, but
//! the learned BOS/EOS embeddings and all layer parameters receive
//! exact analytic gradients. Helpers expand unit encodings to phoneme
//! or frame granularity by duration.

pub mod ggnn;
pub mod params;

pub use ggnn::{ggnn_layer, ggnn_layer_backward, LayerCache, LayerGrads};
pub use params::{
    speaker_embed, speaker_embed_vjp, EncoderConfig, GraphEncoderParams, GruParams, LayerParams,
    MessageParams, SpeakerTable,
};

use crate::graph::boundary::BoundaryMap;
use crate::graph::syntactic::{NodeRole, SyntacticGraph};
use crate::num::{NumError, Tensor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("missing parameter key: {0}")]
    MissingKey(String),
    #[error("unexpected parameter key: {0}")]
    UnexpectedKey(String),
    #[error("speaker id {id} out of range 0..{num_speakers}")]
    SpeakerLookup { id: usize, num_speakers: usize },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

// ---------------------------------------------------------------------------
// pooling
// ---------------------------------------------------------------------------

/// Pivot-centered mean: `v0 + (sum_i (v_i - v0)) / k`, summed in index
/// order. Algebraically the arithmetic mean, but exact on constant
/// blocks, which makes pool-after-expand an exact identity.
fn pivot_mean(block: impl Iterator<Item = f64> + Clone, count: usize) -> f64 {
    let pivot = block.clone().next().expect("non-empty block");
    let sum: f64 = block.map(|v| v - pivot).sum();
    pivot + sum / count as f64
}

/// Pool phoneme encodings to node embeddings: each unit node becomes
/// the arithmetic mean of its phoneme rows, BOS/EOS rows come from the
/// learned sentinel embeddings.
pub fn pool_to_nodes(
    phoneme_enc: &Tensor,
    boundary: &BoundaryMap,
    graph: &SyntacticGraph,
    params: &GraphEncoderParams,
) -> Result<Tensor, EncoderError> {
    let (p, d) = phoneme_enc.expect_matrix("pool_to_nodes")?;
    if p != boundary.num_phonemes() {
        return Err(EncoderError::Num(NumError::ShapeMismatch {
            op: "pool_to_nodes",
            lhs: phoneme_enc.shape().to_vec(),
            rhs: vec![boundary.num_phonemes(), d],
        }));
    }
    if params.e_bos.shape() != [d] {
        return Err(EncoderError::Config(format!(
            "phoneme encoding width {d} does not match parameter hidden size {}",
            params.e_bos.len()
        )));
    }
    if graph.num_units() != boundary.num_units() {
        return Err(EncoderError::Alignment(format!(
            "graph has {} unit nodes but the boundary map yields {} pooled units",
            graph.num_units(),
            boundary.num_units()
        )));
    }
    let counts = boundary.phonemes_per_unit();
    if let Some(u) = counts.iter().position(|&c| c == 0) {
        return Err(EncoderError::Alignment(format!(
            "unit {u} has no assigned phonemes"
        )));
    }
    let starts = prefix_sums(&counts);
    let mut out = Tensor::zeros(&[graph.num_nodes(), d]);
    let mut nth_unit = 0;
    for (node, role) in graph.node_roles().iter().enumerate() {
        match role {
            NodeRole::Bos => out.row_mut(node).copy_from_slice(params.e_bos.data()),
            NodeRole::Eos => out.row_mut(node).copy_from_slice(params.e_eos.data()),
            NodeRole::Unit => {
                let u = graph.unit_index()[nth_unit];
                nth_unit += 1;
                let (start, count) = (starts[u], counts[u]);
                let row = out.row_mut(node);
                for (j, o) in row.iter_mut().enumerate() {
                    *o = pivot_mean(
                        (start..start + count).map(|ph| phoneme_enc.row(ph)[j]),
                        count,
                    );
                }
            }
        }
    }
    Ok(out)
}

fn prefix_sums(counts: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.len());
    let mut acc = 0;
    for &c in counts {
        out.push(acc);
        acc += c;
    }
    out
}

/// Forward identity whose backward contributes nothing to the input's
/// producers.
pub fn stop_gradient(x: &Tensor) -> Tensor {
    x.clone()
}

/// The backward half of [`stop_gradient`]: an all-zero gradient.
pub fn stop_gradient_vjp(x: &Tensor) -> Tensor {
    Tensor::zeros(x.shape())
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

/// Intermediates of one encode pass, kept for the backward pass.
pub struct EncodeCache {
    node_roles: Vec<NodeRole>,
    /// node id of the unit with each pooled position
    node_of_unit: Vec<usize>,
    layer_caches: Vec<LayerCache>,
    sum_includes_input: bool,
}

/// Run graph convolution over already-pooled node embeddings and sum
/// the layer outputs. This is the shared core of [`encode`] and the
/// batched path: it accepts any graph, including a merged batch.
pub fn encode_nodes(
    node_emb: &Tensor,
    graph: &SyntacticGraph,
    params: &GraphEncoderParams,
) -> Result<(Tensor, EncodeCache), EncoderError> {
    let mut layer_caches = Vec::with_capacity(params.layers.len());
    let mut state = node_emb.clone();
    let mut node_out = if params.config.sum_includes_input {
        node_emb.clone()
    } else {
        Tensor::zeros(node_emb.shape())
    };
    for layer in &params.layers {
        let (out, cache) = ggnn_layer(&state, graph, layer, params.config.iterations)?;
        for (acc, &v) in node_out.data_mut().iter_mut().zip(out.data()) {
            *acc += v;
        }
        layer_caches.push(cache);
        state = out;
    }
    let node_of_unit = node_of_unit_map(graph);
    Ok((
        node_out,
        EncodeCache {
            node_roles: graph.node_roles().to_vec(),
            node_of_unit,
            layer_caches,
            sum_includes_input: params.config.sum_includes_input,
        },
    ))
}

fn node_of_unit_map(graph: &SyntacticGraph) -> Vec<usize> {
    let mut node_of_unit = vec![0usize; graph.num_units()];
    for (nth, node) in graph.unit_nodes().enumerate() {
        node_of_unit[graph.unit_index()[nth]] = node;
    }
    node_of_unit
}

/// Select unit rows of a node matrix in pooled order.
pub fn unit_rows(node_out: &Tensor, graph: &SyntacticGraph) -> Tensor {
    let d = node_out.cols();
    let node_of_unit = node_of_unit_map(graph);
    let mut out = Tensor::zeros(&[node_of_unit.len(), d]);
    for (u, &node) in node_of_unit.iter().enumerate() {
        out.row_mut(u).copy_from_slice(node_out.row(node));
    }
    out
}

/// Full encode: pool, detach, convolve, sum layers, take unit rows in
/// pooled order.
pub fn encode(
    phoneme_enc: &Tensor,
    boundary: &BoundaryMap,
    graph: &SyntacticGraph,
    params: &GraphEncoderParams,
) -> Result<Tensor, EncoderError> {
    let (out, _) = encode_with_cache(phoneme_enc, boundary, graph, params)?;
    Ok(out)
}

/// [`encode`] variant that keeps the cache for a backward pass.
pub fn encode_with_cache(
    phoneme_enc: &Tensor,
    boundary: &BoundaryMap,
    graph: &SyntacticGraph,
    params: &GraphEncoderParams,
) -> Result<(Tensor, EncodeCache), EncoderError> {
    let pooled = pool_to_nodes(phoneme_enc, boundary, graph, params)?;
    let detached = stop_gradient(&pooled);
    let (node_out, cache) = encode_nodes(&detached, graph, params)?;
    Ok((unit_rows(&node_out, graph), cache))
}

/// Gradients of an encode pass: every parameter (same shapes as
/// [`GraphEncoderParams`]) and the phoneme encodings, which are exactly
/// zero because the pooled input is detached.
pub struct EncodeGrads {
    pub params: GraphEncoderParams,
    pub phoneme_enc: Tensor,
}

/// Backward pass of [`encode_with_cache`] given the gradient at the
/// unit-level output.
pub fn encode_backward(
    params: &GraphEncoderParams,
    cache: &EncodeCache,
    phoneme_shape: &[usize],
    grad_units: &Tensor,
) -> Result<EncodeGrads, EncoderError> {
    let d = grad_units.cols();
    let m = cache.node_roles.len();
    if grad_units.rows() != cache.node_of_unit.len() {
        return Err(EncoderError::Num(NumError::ShapeMismatch {
            op: "encode_backward",
            lhs: grad_units.shape().to_vec(),
            rhs: vec![cache.node_of_unit.len(), d],
        }));
    }
    // scatter unit gradients back to node rows
    let mut grad_node_out = Tensor::zeros(&[m, d]);
    for (u, &node) in cache.node_of_unit.iter().enumerate() {
        grad_node_out.row_mut(node).copy_from_slice(grad_units.row(u));
    }

    let mut grads = GraphEncoderParams::zeros(&params.config);
    // the output sums every layer's output, so layer k receives the
    // direct sum gradient plus the chained gradient from layer k+1
    let mut acc = grad_node_out.clone();
    let mut grad_h0 = None;
    for (k, (layer, layer_cache)) in params
        .layers
        .iter()
        .zip(&cache.layer_caches)
        .enumerate()
        .rev()
    {
        let (g_in, layer_grads) = ggnn_layer_backward(layer, layer_cache, &acc);
        store_layer_grads(&mut grads.layers[k], layer_grads);
        if k > 0 {
            acc = tensor_sum(&grad_node_out, &g_in);
        } else {
            grad_h0 = Some(if cache.sum_includes_input {
                tensor_sum(&grad_node_out, &g_in)
            } else {
                g_in
            });
        }
    }
    let grad_h0 = grad_h0.expect("at least one layer");

    // pooling backward: sentinel rows feed the learned embeddings; the
    // phoneme branch is detached, so its gradient is exactly zero
    for (node, role) in cache.node_roles.iter().enumerate() {
        match role {
            NodeRole::Bos => add_into(grads.e_bos.data_mut(), grad_h0.row(node)),
            NodeRole::Eos => add_into(grads.e_eos.data_mut(), grad_h0.row(node)),
            NodeRole::Unit => {}
        }
    }
    Ok(EncodeGrads {
        params: grads,
        phoneme_enc: Tensor::zeros(phoneme_shape),
    })
}

fn store_layer_grads(into: &mut LayerParams, grads: LayerGrads) {
    for ((_, m), (_, gw, gb)) in into.messages.iter_mut().zip(grads.messages) {
        m.weight = gw;
        m.bias = gb;
    }
    into.gru = grads.gru;
}

fn tensor_sum(a: &Tensor, b: &Tensor) -> Tensor {
    crate::num::ops::add(a, b).expect("matching shapes")
}

fn add_into(into: &mut [f64], from: &[f64]) {
    for (a, &b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

// ---------------------------------------------------------------------------
// batched encode
// ---------------------------------------------------------------------------

/// One sentence's inputs for the batched path.
pub struct SentenceInput<'a> {
    pub phoneme_enc: &'a Tensor,
    pub boundary: &'a BoundaryMap,
    pub graph: &'a SyntacticGraph,
}

/// Encode a batch by merging the graphs into one, convolving once, and
/// splitting the unit encodings back per sentence. Numerically
/// equivalent to encoding each sentence alone.
pub fn encode_batch(
    items: &[SentenceInput<'_>],
    params: &GraphEncoderParams,
) -> Result<Vec<Tensor>, EncoderError> {
    if items.is_empty() {
        return Err(EncoderError::Config("encode_batch: empty batch".into()));
    }
    let mut pooled_parts = Vec::with_capacity(items.len());
    for item in items {
        pooled_parts.push(pool_to_nodes(
            item.phoneme_enc,
            item.boundary,
            item.graph,
            params,
        )?);
    }
    let graphs: Vec<SyntacticGraph> = items.iter().map(|i| i.graph.clone()).collect();
    let batch = crate::graph::batch::merge_graphs(&graphs)?;
    let pooled_refs: Vec<&Tensor> = pooled_parts.iter().collect();
    let pooled = crate::num::ops::concat_rows(&pooled_refs)?;
    let detached = stop_gradient(&pooled);
    let (node_out, _) = encode_nodes(&detached, batch.merged(), params)?;
    let units = unit_rows(&node_out, batch.merged());
    Ok(batch.split_unit_matrix(&units)?)
}

// ---------------------------------------------------------------------------
// duration expansion
// ---------------------------------------------------------------------------

/// Word-level durations: how many phonemes and frames each word spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DurationRepr", into = "DurationRepr")]
pub struct DurationTable {
    phonemes_per_word: Vec<usize>,
    frames_per_word: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DurationRepr {
    phonemes_per_word: Vec<usize>,
    frames_per_word: Vec<usize>,
}

impl TryFrom<DurationRepr> for DurationTable {
    type Error = EncoderError;
    fn try_from(r: DurationRepr) -> Result<Self, EncoderError> {
        DurationTable::new(r.phonemes_per_word, r.frames_per_word)
    }
}

impl From<DurationTable> for DurationRepr {
    fn from(d: DurationTable) -> DurationRepr {
        DurationRepr {
            phonemes_per_word: d.phonemes_per_word,
            frames_per_word: d.frames_per_word,
        }
    }
}

impl DurationTable {
    pub fn new(
        phonemes_per_word: Vec<usize>,
        frames_per_word: Vec<usize>,
    ) -> Result<Self, EncoderError> {
        if phonemes_per_word.is_empty() || phonemes_per_word.len() != frames_per_word.len() {
            return Err(EncoderError::Config(format!(
                "duration table needs equal non-empty count lists, got {} and {}",
                phonemes_per_word.len(),
                frames_per_word.len()
            )));
        }
        if phonemes_per_word.iter().chain(&frames_per_word).any(|&c| c == 0) {
            return Err(EncoderError::Config(
                "duration counts must all be >= 1".into(),
            ));
        }
        Ok(DurationTable {
            phonemes_per_word,
            frames_per_word,
        })
    }

    pub fn num_words(&self) -> usize {
        self.phonemes_per_word.len()
    }

    pub fn phonemes_per_word(&self) -> &[usize] {
        &self.phonemes_per_word
    }

    pub fn frames_per_word(&self) -> &[usize] {
        &self.frames_per_word
    }

    pub fn total_phonemes(&self) -> usize {
        self.phonemes_per_word.iter().sum()
    }

    pub fn total_frames(&self) -> usize {
        self.frames_per_word.iter().sum()
    }
}

/// Repeat each row by a per-row count (the length-regulator pattern).
pub fn expand_rows(word_enc: &Tensor, counts: &[usize]) -> Result<Tensor, EncoderError> {
    let (n, d) = word_enc.expect_matrix("expand_rows")?;
    if n != counts.len() {
        return Err(EncoderError::Num(NumError::ShapeMismatch {
            op: "expand_rows",
            lhs: word_enc.shape().to_vec(),
            rhs: vec![counts.len(), d],
        }));
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(EncoderError::Config(
            "expand_rows: counts must all be >= 1".into(),
        ));
    }
    let total: usize = counts.iter().sum();
    let mut data = Vec::with_capacity(total * d);
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            data.extend_from_slice(word_enc.row(i));
        }
    }
    Ok(Tensor::from_parts(vec![total, d], data))
}

/// Expand word encodings to phoneme granularity.
pub fn expand_to_phoneme(
    word_enc: &Tensor,
    durations: &DurationTable,
) -> Result<Tensor, EncoderError> {
    expand_rows(word_enc, durations.phonemes_per_word())
}

/// Expand word encodings to frame granularity.
pub fn expand_to_frame(
    word_enc: &Tensor,
    durations: &DurationTable,
) -> Result<Tensor, EncoderError> {
    expand_rows(word_enc, durations.frames_per_word())
}

/// Mean-pool consecutive row blocks (the adjoint of [`expand_rows`] up
/// to the 1/count factor). For Chinese, bridges character encodings to
/// word level before duration expansion.
pub fn mean_pool_rows(mat: &Tensor, counts: &[usize]) -> Result<Tensor, EncoderError> {
    let (m, d) = mat.expect_matrix("mean_pool_rows")?;
    let total: usize = counts.iter().sum();
    if total != m || counts.iter().any(|&c| c == 0) {
        return Err(EncoderError::Num(NumError::ShapeMismatch {
            op: "mean_pool_rows",
            lhs: mat.shape().to_vec(),
            rhs: vec![total, d],
        }));
    }
    let mut out = Tensor::zeros(&[counts.len(), d]);
    let mut start = 0;
    for (i, &c) in counts.iter().enumerate() {
        let orow = out.row_mut(i);
        for (j, o) in orow.iter_mut().enumerate() {
            *o = pivot_mean((start..start + c).map(|r| mat.row(r)[j]), c);
        }
        start += c;
    }
    Ok(out)
}
