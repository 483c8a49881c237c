//! Learnable parameters of the syntactic graph encoder.

use super::EncoderError;
use crate::graph::syntactic::EdgeType;
use crate::graph::tree::Language;
use crate::num::{Rng, Tensor};
use std::collections::BTreeMap;

/// Shape configuration of one graph encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub hidden: usize,
    pub layers: usize,
    pub iterations: usize,
    pub language: Language,
    /// When true, the pooled input joins the layer outputs in the final
    /// sum; the default sums layer outputs only.
    pub sum_includes_input: bool,
}

impl EncoderConfig {
    pub const DEFAULT_HIDDEN: usize = 192;
    pub const DEFAULT_LAYERS: usize = 2;
    pub const DEFAULT_ITERATIONS: usize = 5;

    pub fn for_language(language: Language) -> Self {
        EncoderConfig {
            hidden: Self::DEFAULT_HIDDEN,
            layers: Self::DEFAULT_LAYERS,
            iterations: Self::DEFAULT_ITERATIONS,
            language,
            sum_includes_input: false,
        }
    }

    pub fn edge_types(&self) -> &'static [EdgeType] {
        EdgeType::set_for(self.language)
    }
}

/// GRU cell weights; matrices act on row vectors from the right.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub w_z: Tensor,
    pub u_z: Tensor,
    pub b_z: Tensor,
    pub w_r: Tensor,
    pub u_r: Tensor,
    pub b_r: Tensor,
    pub w_h: Tensor,
    pub u_h: Tensor,
    pub b_h: Tensor,
}

/// Per-edge-type linear message transform.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageParams {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// One gated graph convolution layer: a message transform per edge type
/// plus the shared GRU cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Sorted by edge type for deterministic iteration.
    pub messages: Vec<(EdgeType, MessageParams)>,
    pub gru: GruParams,
}

impl LayerParams {
    pub fn message(&self, etype: EdgeType) -> Option<&MessageParams> {
        self.messages
            .iter()
            .find(|(t, _)| *t == etype)
            .map(|(_, m)| m)
    }
}

/// Full parameter bundle of one syntactic graph encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEncoderParams {
    pub config: EncoderConfig,
    pub layers: Vec<LayerParams>,
    pub e_bos: Tensor,
    pub e_eos: Tensor,
}

impl GraphEncoderParams {
    /// All parameters zero (used by analytic tests; zero parameters
    /// make each GGNN iteration halve the hidden state).
    pub fn zeros(config: &EncoderConfig) -> Self {
        Self::build(config, |_shape, _rng| None, &mut Rng::new(0))
    }

    /// Uniform(-1/sqrt(d), 1/sqrt(d)) weights and sentinel embeddings,
    /// zero biases.
    pub fn init(config: &EncoderConfig, rng: &mut Rng) -> Self {
        let bound = 1.0 / (config.hidden as f64).sqrt();
        Self::build(config, |shape, rng| Some(Tensor::uniform(shape, bound, rng)), rng)
    }

    fn build(
        config: &EncoderConfig,
        mut weight: impl FnMut(&[usize], &mut Rng) -> Option<Tensor>,
        rng: &mut Rng,
    ) -> Self {
        let d = config.hidden;
        let mut mk =
            |shape: &[usize], rng: &mut Rng| weight(shape, rng).unwrap_or_else(|| Tensor::zeros(shape));
        let mut mat = |rng: &mut Rng| mk(&[d, d], rng);
        let layers = (0..config.layers)
            .map(|_| LayerParams {
                messages: config
                    .edge_types()
                    .iter()
                    .map(|&t| {
                        (
                            t,
                            MessageParams {
                                weight: mat(rng),
                                bias: Tensor::zeros(&[d]),
                            },
                        )
                    })
                    .collect(),
                gru: GruParams {
                    w_z: mat(rng),
                    u_z: mat(rng),
                    b_z: Tensor::zeros(&[d]),
                    w_r: mat(rng),
                    u_r: mat(rng),
                    b_r: Tensor::zeros(&[d]),
                    w_h: mat(rng),
                    u_h: mat(rng),
                    b_h: Tensor::zeros(&[d]),
                },
            })
            .collect();
        GraphEncoderParams {
            config: config.clone(),
            layers,
            e_bos: mk(&[d], rng),
            e_eos: mk(&[d], rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.config.hidden
    }

    /// Total scalar parameter count.
    pub fn num_params(&self) -> usize {
        self.for_each_tensor_ref()
            .map(|(_, t)| t.len())
            .sum()
    }

    /// Canonical (key, tensor) walk in bundle-key order.
    fn for_each_tensor_ref(&self) -> impl Iterator<Item = (String, &Tensor)> {
        let mut items: Vec<(String, &Tensor)> = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let ln = k + 1;
            for (etype, m) in &layer.messages {
                items.push((format!("layer{ln}.W_{}", etype.code()), &m.weight));
                items.push((format!("layer{ln}.b_{}", etype.code()), &m.bias));
            }
            let g = &layer.gru;
            items.push((format!("gru{ln}.W_z"), &g.w_z));
            items.push((format!("gru{ln}.U_z"), &g.u_z));
            items.push((format!("gru{ln}.b_z"), &g.b_z));
            items.push((format!("gru{ln}.W_r"), &g.w_r));
            items.push((format!("gru{ln}.U_r"), &g.u_r));
            items.push((format!("gru{ln}.b_r"), &g.b_r));
            items.push((format!("gru{ln}.W_h"), &g.w_h));
            items.push((format!("gru{ln}.U_h"), &g.u_h));
            items.push((format!("gru{ln}.b_h"), &g.b_h));
        }
        items.push(("e_BOS".to_string(), &self.e_bos));
        items.push(("e_EOS".to_string(), &self.e_eos));
        items.into_iter()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut items: Vec<&mut Tensor> = Vec::new();
        for layer in self.layers.iter_mut() {
            for (_, m) in &mut layer.messages {
                items.push(&mut m.weight);
                items.push(&mut m.bias);
            }
            let g = &mut layer.gru;
            items.push(&mut g.w_z);
            items.push(&mut g.u_z);
            items.push(&mut g.b_z);
            items.push(&mut g.w_r);
            items.push(&mut g.u_r);
            items.push(&mut g.b_r);
            items.push(&mut g.w_h);
            items.push(&mut g.u_h);
            items.push(&mut g.b_h);
        }
        items.push(&mut self.e_bos);
        items.push(&mut self.e_eos);
        items
    }

    /// Parameter-group labels in canonical order (one per tensor).
    pub fn group_names(&self) -> Vec<String> {
        self.for_each_tensor_ref().map(|(k, _)| k).collect()
    }

    /// Flatten every parameter into one vector, in canonical order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.for_each_tensor_ref()
            .flat_map(|(_, t)| t.data().iter().copied().collect::<Vec<f64>>())
            .collect()
    }

    /// Per-tensor (name, offset, length) layout matching [`Self::to_flat`].
    pub fn flat_layout(&self) -> Vec<(String, usize, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        for (k, t) in self.for_each_tensor_ref() {
            out.push((k, off, t.len()));
            off += t.len();
        }
        out
    }

    /// Overwrite every parameter from a flat vector in canonical order.
    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<(), EncoderError> {
        let expected = self.num_params();
        if flat.len() != expected {
            return Err(EncoderError::Config(format!(
                "flat parameter vector has {} values, expected {expected}",
                flat.len()
            )));
        }
        let mut off = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }

    /// Serialize to the parameter-bundle map keyed by canonical names.
    pub fn to_bundle(&self) -> BTreeMap<String, Tensor> {
        self.for_each_tensor_ref()
            .map(|(k, t)| (k, t.clone()))
            .collect()
    }

    /// Load from a bundle map, validating the complete expected key set
    /// for the configured language and shape checking every tensor.
    pub fn from_bundle(
        bundle: &BTreeMap<String, Tensor>,
        config: &EncoderConfig,
    ) -> Result<Self, EncoderError> {
        let mut params = Self::zeros(config);
        let expected: Vec<(String, Vec<usize>)> = params
            .for_each_tensor_ref()
            .map(|(k, t)| (k, t.shape().to_vec()))
            .collect();
        for key in bundle.keys() {
            if !expected.iter().any(|(k, _)| k == key) {
                return Err(EncoderError::UnexpectedKey(key.clone()));
            }
        }
        let mut values = Vec::with_capacity(expected.len());
        for (key, shape) in &expected {
            let t = bundle
                .get(key)
                .ok_or_else(|| EncoderError::MissingKey(key.clone()))?;
            if t.shape() != shape.as_slice() {
                return Err(EncoderError::Config(format!(
                    "parameter '{key}' has shape {:?}, expected {shape:?}",
                    t.shape()
                )));
            }
            values.push(t.clone());
        }
        for (slot, value) in params.tensors_mut().into_iter().zip(values) {
            *slot = value;
        }
        Ok(params)
    }
}

/// Learned per-speaker embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerTable {
    table: Tensor,
}

impl SpeakerTable {
    pub const DEFAULT_SPEAKERS: usize = 2320;

    pub fn new(table: Tensor) -> Result<Self, EncoderError> {
        table.expect_matrix("SpeakerTable::new")?;
        Ok(SpeakerTable { table })
    }

    pub fn init(num_speakers: usize, hidden: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        SpeakerTable {
            table: Tensor::uniform(&[num_speakers, hidden], bound, rng),
        }
    }

    pub fn num_speakers(&self) -> usize {
        self.table.rows()
    }

    pub fn hidden(&self) -> usize {
        self.table.cols()
    }

    pub fn table(&self) -> &Tensor {
        &self.table
    }
}

/// Row lookup: the embedding of one speaker.
pub fn speaker_embed(speaker_id: usize, table: &SpeakerTable) -> Result<Tensor, EncoderError> {
    if speaker_id >= table.num_speakers() {
        return Err(EncoderError::SpeakerLookup {
            id: speaker_id,
            num_speakers: table.num_speakers(),
        });
    }
    Ok(Tensor::new(
        vec![table.hidden()],
        table.table.row(speaker_id).to_vec(),
    )
    .expect("row of a valid table"))
}

/// VJP of [`speaker_embed`]: the gradient lands in the looked-up row
/// only.
pub fn speaker_embed_vjp(table: &SpeakerTable, speaker_id: usize, g: &Tensor) -> Tensor {
    let mut grad = Tensor::zeros(&[table.num_speakers(), table.hidden()]);
    grad.row_mut(speaker_id).copy_from_slice(g.data());
    grad
}
