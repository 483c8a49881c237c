//! Gated graph convolution: per-edge-type linear messages folded into
//! each node state through a GRU cell, iterated a fixed number of
//! times. The backward pass replays the iterations in reverse using the
//! cached intermediates.

use super::params::{GruParams, LayerParams};
use super::EncoderError;
use crate::graph::syntactic::{EdgeType, SyntacticGraph};
use crate::num::{ops, Tensor};

/// Edge endpoints grouped by type, in graph edge order.
#[derive(Debug, Clone)]
pub(crate) struct EdgePlan {
    per_type: Vec<(EdgeType, Vec<(usize, usize)>)>,
}

impl EdgePlan {
    pub(crate) fn new(graph: &SyntacticGraph, layer: &LayerParams) -> Result<Self, EncoderError> {
        let mut per_type: Vec<(EdgeType, Vec<(usize, usize)>)> = layer
            .messages
            .iter()
            .map(|(t, _)| (*t, Vec::new()))
            .collect();
        for e in graph.edges() {
            match per_type.iter_mut().find(|(t, _)| *t == e.etype) {
                Some((_, list)) => list.push((e.src, e.dst)),
                None => {
                    return Err(EncoderError::Config(format!(
                        "graph contains {} edges but the layer has no message \
                         parameters for that type",
                        e.etype.code()
                    )))
                }
            }
        }
        Ok(EdgePlan { per_type })
    }
}

/// Per-iteration intermediates kept for the backward pass.
#[derive(Debug)]
pub struct LayerCache {
    plan: EdgePlan,
    /// h^0 .. h^T
    states: Vec<Tensor>,
    agg: Vec<Tensor>,
    z: Vec<Tensor>,
    r: Vec<Tensor>,
    h_tilde: Vec<Tensor>,
}

impl LayerCache {
    pub fn output(&self) -> &Tensor {
        self.states.last().expect("at least h^0")
    }
}

/// Gradients produced by one layer's backward pass; mirrors
/// [`LayerParams`] shapes.
pub struct LayerGrads {
    pub messages: Vec<(EdgeType, Tensor, Tensor)>,
    pub gru: GruParams,
}

fn gather_rows(h: &Tensor, indices: impl Iterator<Item = usize>, count: usize) -> Tensor {
    let d = h.cols();
    let mut data = Vec::with_capacity(count * d);
    for i in indices {
        data.extend_from_slice(h.row(i));
    }
    Tensor::new(vec![count.max(1), d], data).unwrap_or_else(|_| Tensor::zeros(&[1, d]))
}

/// Run `iterations` gated updates over the graph.
///
/// Each iteration aggregates, for every node v, the sum of
/// `h_u W_e + b_e` over incoming edges (u -> v, type e), then applies a
/// GRU update with the aggregate as the input signal.
pub fn ggnn_layer(
    node_emb: &Tensor,
    graph: &SyntacticGraph,
    layer: &LayerParams,
    iterations: usize,
) -> Result<(Tensor, LayerCache), EncoderError> {
    let (m, d) = node_emb.expect_matrix("ggnn_layer")?;
    if m != graph.num_nodes() {
        return Err(EncoderError::Num(crate::num::NumError::ShapeMismatch {
            op: "ggnn_layer",
            lhs: node_emb.shape().to_vec(),
            rhs: vec![graph.num_nodes(), d],
        }));
    }
    let plan = EdgePlan::new(graph, layer)?;
    let mut cache = LayerCache {
        plan,
        states: vec![node_emb.clone()],
        agg: Vec::with_capacity(iterations),
        z: Vec::with_capacity(iterations),
        r: Vec::with_capacity(iterations),
        h_tilde: Vec::with_capacity(iterations),
    };
    for _ in 0..iterations {
        let h = cache.states.last().unwrap();
        let mut agg = Tensor::zeros(&[m, d]);
        for (etype, list) in &cache.plan.per_type {
            if list.is_empty() {
                continue;
            }
            let msg_params = layer.message(*etype).expect("plan built from layer");
            let x = gather_rows(h, list.iter().map(|&(s, _)| s), list.len());
            let msg = ops::add_bias(&ops::matmul(&x, &msg_params.weight)?, &msg_params.bias)?;
            for (row, &(_, dst)) in list.iter().enumerate() {
                let mrow = msg.row(row).to_vec();
                for (a, v) in agg.row_mut(dst).iter_mut().zip(mrow) {
                    *a += v;
                }
            }
        }
        let gru = &layer.gru;
        let z = ops::sigmoid(&gru_preact(&agg, h, &gru.w_z, &gru.u_z, &gru.b_z)?);
        let r = ops::sigmoid(&gru_preact(&agg, h, &gru.w_r, &gru.u_r, &gru.b_r)?);
        let rh = ops::mul(&r, h)?;
        let h_tilde = ops::tanh(&gru_preact(&agg, &rh, &gru.w_h, &gru.u_h, &gru.b_h)?);
        // h' = (1 - z) ⊙ h + z ⊙ h~
        let mut next = Tensor::zeros(&[m, d]);
        for ((o, (&zv, &hv)), &tv) in next
            .data_mut()
            .iter_mut()
            .zip(z.data().iter().zip(h.data()))
            .zip(h_tilde.data())
        {
            *o = (1.0 - zv) * hv + zv * tv;
        }
        cache.agg.push(agg);
        cache.z.push(z);
        cache.r.push(r);
        cache.h_tilde.push(h_tilde);
        cache.states.push(next);
    }
    Ok((cache.output().clone(), cache))
}

fn gru_preact(
    agg: &Tensor,
    state: &Tensor,
    w: &Tensor,
    u: &Tensor,
    b: &Tensor,
) -> Result<Tensor, EncoderError> {
    let wa = ops::matmul(agg, w)?;
    let us = ops::matmul(state, u)?;
    Ok(ops::add_bias(&ops::add(&wa, &us)?, b)?)
}

/// Backward pass: gradient of a scalar loss with respect to the layer
/// input and every layer parameter, given the gradient at the output.
pub fn ggnn_layer_backward(
    layer: &LayerParams,
    cache: &LayerCache,
    grad_out: &Tensor,
) -> (Tensor, LayerGrads) {
    let d = cache.states[0].cols();
    let iterations = cache.agg.len();
    let mut grads = LayerGrads {
        messages: layer
            .messages
            .iter()
            .map(|(t, _)| (*t, Tensor::zeros(&[d, d]), Tensor::zeros(&[d])))
            .collect(),
        gru: GruParams {
            w_z: Tensor::zeros(&[d, d]),
            u_z: Tensor::zeros(&[d, d]),
            b_z: Tensor::zeros(&[d]),
            w_r: Tensor::zeros(&[d, d]),
            u_r: Tensor::zeros(&[d, d]),
            b_r: Tensor::zeros(&[d]),
            w_h: Tensor::zeros(&[d, d]),
            u_h: Tensor::zeros(&[d, d]),
            b_h: Tensor::zeros(&[d]),
        },
    };
    let mut g = grad_out.clone();
    for t in (0..iterations).rev() {
        let h_prev = &cache.states[t];
        let (agg, z, r, h_tilde) = (&cache.agg[t], &cache.z[t], &cache.r[t], &cache.h_tilde[t]);
        let gru = &layer.gru;

        // h' = (1 - z) ⊙ h + z ⊙ h~
        let mut g_z = Tensor::zeros(g.shape());
        let mut g_htilde = Tensor::zeros(g.shape());
        let mut g_hprev = Tensor::zeros(g.shape());
        for i in 0..g.len() {
            let (gv, zv) = (g.data()[i], z.data()[i]);
            g_z.data_mut()[i] = gv * (h_tilde.data()[i] - h_prev.data()[i]);
            g_htilde.data_mut()[i] = gv * zv;
            g_hprev.data_mut()[i] = gv * (1.0 - zv);
        }

        // candidate: h~ = tanh(agg W_h + (r ⊙ h) U_h + b_h)
        let g_ch = ops::tanh_vjp(h_tilde, &g_htilde);
        let rh = ops::mul(r, h_prev).expect("cached shapes");
        let (g_agg_h, g_wh) = ops::matmul_vjp(agg, &gru.w_h, &g_ch);
        let (g_rh, g_uh) = ops::matmul_vjp(&rh, &gru.u_h, &g_ch);
        accumulate(&mut grads.gru.w_h, &g_wh);
        accumulate(&mut grads.gru.u_h, &g_uh);
        accumulate(&mut grads.gru.b_h, &ops::colsum(&g_ch));
        let (g_r, g_hprev_from_rh) = ops::mul_vjp(r, h_prev, &g_rh);
        accumulate(&mut g_hprev, &g_hprev_from_rh);

        // update gate: z = sigma(agg W_z + h U_z + b_z)
        let g_cz = ops::sigmoid_vjp(z, &g_z);
        let (g_agg_z, g_wz) = ops::matmul_vjp(agg, &gru.w_z, &g_cz);
        let (g_hprev_z, g_uz) = ops::matmul_vjp(h_prev, &gru.u_z, &g_cz);
        accumulate(&mut grads.gru.w_z, &g_wz);
        accumulate(&mut grads.gru.u_z, &g_uz);
        accumulate(&mut grads.gru.b_z, &ops::colsum(&g_cz));
        accumulate(&mut g_hprev, &g_hprev_z);

        // reset gate: r = sigma(agg W_r + h U_r + b_r)
        let g_cr = ops::sigmoid_vjp(r, &g_r);
        let (g_agg_r, g_wr) = ops::matmul_vjp(agg, &gru.w_r, &g_cr);
        let (g_hprev_r, g_ur) = ops::matmul_vjp(h_prev, &gru.u_r, &g_cr);
        accumulate(&mut grads.gru.w_r, &g_wr);
        accumulate(&mut grads.gru.u_r, &g_ur);
        accumulate(&mut grads.gru.b_r, &ops::colsum(&g_cr));
        accumulate(&mut g_hprev, &g_hprev_r);

        // total aggregate gradient
        let mut g_agg = g_agg_h;
        accumulate(&mut g_agg, &g_agg_z);
        accumulate(&mut g_agg, &g_agg_r);

        // aggregation: agg[dst] += h[src] W_e + b_e per edge
        for (ti, (etype, list)) in cache.plan.per_type.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let msg_params = layer.message(*etype).expect("plan built from layer");
            let x = gather_rows(h_prev, list.iter().map(|&(s, _)| s), list.len());
            let g_msg = gather_rows(&g_agg, list.iter().map(|&(_, d)| d), list.len());
            let (g_x, g_w) = ops::matmul_vjp(&x, &msg_params.weight, &g_msg);
            accumulate(&mut grads.messages[ti].1, &g_w);
            accumulate(&mut grads.messages[ti].2, &ops::colsum(&g_msg));
            for (row, &(src, _)) in list.iter().enumerate() {
                let gx = g_x.row(row).to_vec();
                for (a, v) in g_hprev.row_mut(src).iter_mut().zip(gx) {
                    *a += v;
                }
            }
        }
        g = g_hprev;
    }
    (g, grads)
}

fn accumulate(into: &mut Tensor, from: &Tensor) {
    debug_assert_eq!(into.shape(), from.shape());
    for (a, &b) in into.data_mut().iter_mut().zip(from.data()) {
        *a += b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::params::{EncoderConfig, GraphEncoderParams};
    use crate::graph::boundary::BoundaryMap;
    use crate::graph::syntactic::build_english_graph;
    use crate::graph::tree::{DependencyTree, Language, Word};
    use crate::num::Rng;

    fn small_graph(n: usize) -> SyntacticGraph {
        let words = (0..n)
            .map(|i| Word {
                id: i + 1,
                form: format!("w{i}"),
                head: i,
            })
            .collect();
        let tree = DependencyTree::new(words, Language::English).unwrap();
        build_english_graph(&tree, &BoundaryMap::english((0..n).collect()).unwrap()).unwrap()
    }

    fn small_config(d: usize) -> EncoderConfig {
        let mut cfg = EncoderConfig::for_language(Language::English);
        cfg.hidden = d;
        cfg
    }

    #[test]
    fn zero_params_halve_state_each_iteration() {
        // agg = 0, z = 0.5, h~ = 0 => h' = h / 2; after T = 5, h / 32
        let cfg = small_config(3);
        let params = GraphEncoderParams::zeros(&cfg);
        let graph = small_graph(2);
        let mut rng = Rng::new(11);
        let h0 = Tensor::uniform(&[graph.num_nodes(), 3], 1.0, &mut rng);
        let (out, _) = ggnn_layer(&h0, &graph, &params.layers[0], 5).unwrap();
        for (o, h) in out.data().iter().zip(h0.data()) {
            assert!((o - h / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn isolated_node_scales_identically_with_zero_params() {
        // a 1-word graph's unit node has only sentinel edges; with zero
        // params every node halves regardless of connectivity
        let cfg = small_config(2);
        let params = GraphEncoderParams::zeros(&cfg);
        let graph = small_graph(1);
        let h0 = Tensor::from_rows(&[vec![1.0, -2.0], vec![0.5, 4.0], vec![3.0, 0.25]]).unwrap();
        let (out, _) = ggnn_layer(&h0, &graph, &params.layers[0], 5).unwrap();
        for (o, h) in out.data().iter().zip(h0.data()) {
            assert!((o - h / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn missing_edge_type_is_config_error() {
        let cfg = small_config(2);
        let mut params = GraphEncoderParams::zeros(&cfg);
        params.layers[0].messages.retain(|(t, _)| *t != EdgeType::DepReverse);
        let graph = small_graph(2);
        let h0 = Tensor::zeros(&[graph.num_nodes(), 2]);
        match ggnn_layer(&h0, &graph, &params.layers[0], 1) {
            Err(EncoderError::Config(msg)) => assert!(msg.contains("DR")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn layer_gradients_pass_finite_difference_check() {
        let cfg = small_config(3);
        let mut rng = Rng::new(21);
        let params = GraphEncoderParams::init(&cfg, &mut rng);
        let graph = small_graph(3);
        let h0 = Tensor::uniform(&[graph.num_nodes(), 3], 0.8, &mut rng);

        // loss = sum(ggnn_layer(h0)); check d loss / d h0
        let layer = &params.layers[0];
        let (out, cache) = ggnn_layer(&h0, &graph, layer, 2).unwrap();
        let ones = Tensor::full(out.shape(), 1.0);
        let (g_input, _) = ggnn_layer_backward(layer, &cache, &ones);

        let f = |flat: &[f64]| {
            let h = Tensor::new(h0.shape().to_vec(), flat.to_vec()).unwrap();
            let (o, _) = ggnn_layer(&h, &graph, layer, 2).unwrap();
            Ok(o.sum())
        };
        let err = crate::num::gradcheck(f, h0.data(), g_input.data(), 1e-6).unwrap();
        assert!(err < 1e-7, "input gradient error {err}");
    }
}
