//! Parameters of the multi-length discriminator ensemble.

use super::DiscError;
use crate::num::{Rng, Tensor};
use std::collections::BTreeMap;

/// Convolution geometry shared by every CNN discriminator.
pub const KERNEL: usize = 3;
pub const STRIDE: usize = 2;
pub const PADDING: usize = 1;

/// Shape and regularization configuration of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscConfig {
    pub windows: Vec<usize>,
    pub n_mels: usize,
    /// Hidden channel width of every conv layer (the first conv maps
    /// 1 -> channels).
    pub channels: usize,
    /// Total conv layers (N + 1); the latter N carry instance norm.
    pub conv_layers: usize,
    pub leaky_slope: f64,
    pub dropout_rate: f64,
    pub instnorm_eps: f64,
}

impl Default for DiscConfig {
    fn default() -> Self {
        DiscConfig {
            windows: vec![32, 64, 128],
            n_mels: 80,
            channels: 32,
            conv_layers: 3,
            leaky_slope: 0.2,
            dropout_rate: 0.1,
            instnorm_eps: 1e-5,
        }
    }
}

impl DiscConfig {
    /// Output height/width after one strided conv.
    fn conv_dim(size: usize) -> usize {
        (size + 2 * PADDING - KERNEL) / STRIDE + 1
    }

    /// Flattened feature count after all conv layers for one window.
    pub fn flat_features(&self, window: usize) -> usize {
        let (mut h, mut w) = (window, self.n_mels);
        for _ in 0..self.conv_layers {
            h = Self::conv_dim(h);
            w = Self::conv_dim(w);
        }
        self.channels * h * w
    }

    fn channel_plan(&self) -> Vec<(usize, usize)> {
        (0..self.conv_layers)
            .map(|i| {
                let c_in = if i == 0 { 1 } else { self.channels };
                (c_in, self.channels)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), DiscError> {
        if self.windows.is_empty() {
            return Err(DiscError::Config("no window sizes configured".into()));
        }
        if self.conv_layers == 0 {
            return Err(DiscError::Config("conv_layers must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(DiscError::Config(format!(
                "dropout rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if self.channels == 0 || self.n_mels == 0 || self.windows.iter().any(|&w| w == 0) {
            return Err(DiscError::Config(
                "channels, n_mels, and window sizes must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One conv layer: kernel [c_out, c_in, KERNEL, KERNEL] plus bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayerParams {
    pub kernel: Tensor,
    pub bias: Tensor,
}

/// One window's CNN discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    pub window: usize,
    pub convs: Vec<ConvLayerParams>,
    /// [flat_features, 1]
    pub linear_w: Tensor,
    /// [1]
    pub linear_b: Tensor,
}

/// The full ensemble: one independent CNN per window length.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorParams {
    pub config: DiscConfig,
    pub cnns: Vec<CnnParams>,
}

impl DiscriminatorParams {
    pub fn zeros(config: &DiscConfig) -> Result<Self, DiscError> {
        Self::build(config, |shape, _| Some(Tensor::zeros(shape)), &mut Rng::new(0))
    }

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
    pub fn init(config: &DiscConfig, rng: &mut Rng) -> Result<Self, DiscError> {
        Self::build(
            config,
            |shape, rng| {
                let fan_in: usize = shape[1..].iter().product();
                let bound = 1.0 / (fan_in as f64).sqrt();
                Some(Tensor::uniform(shape, bound, rng))
            },
            rng,
        )
    }

    fn build(
        config: &DiscConfig,
        mut weight: impl FnMut(&[usize], &mut Rng) -> Option<Tensor>,
        rng: &mut Rng,
    ) -> Result<Self, DiscError> {
        config.validate()?;
        let cnns = config
            .windows
            .iter()
            .map(|&window| {
                let convs = config
                    .channel_plan()
                    .into_iter()
                    .map(|(c_in, c_out)| ConvLayerParams {
                        kernel: weight(&[c_out, c_in, KERNEL, KERNEL], rng)
                            .expect("weight fn always returns"),
                        bias: Tensor::zeros(&[c_out]),
                    })
                    .collect();
                let flat = config.flat_features(window);
                CnnParams {
                    window,
                    convs,
                    linear_w: weight(&[flat, 1], rng).expect("weight fn always returns"),
                    linear_b: Tensor::zeros(&[1]),
                }
            })
            .collect();
        Ok(DiscriminatorParams {
            config: config.clone(),
            cnns,
        })
    }

    pub fn cnn_for(&self, window: usize) -> Option<&CnnParams> {
        self.cnns.iter().find(|c| c.window == window)
    }

    pub fn num_params(&self) -> usize {
        self.walk().map(|(_, t)| t.len()).sum()
    }

    fn walk(&self) -> impl Iterator<Item = (String, &Tensor)> {
        let mut items: Vec<(String, &Tensor)> = Vec::new();
        for cnn in &self.cnns {
            let w = cnn.window;
            for (i, conv) in cnn.convs.iter().enumerate() {
                items.push((format!("w{w}.conv{i}.kernel"), &conv.kernel));
                items.push((format!("w{w}.conv{i}.bias"), &conv.bias));
            }
            items.push((format!("w{w}.linear.weight"), &cnn.linear_w));
            items.push((format!("w{w}.linear.bias"), &cnn.linear_b));
        }
        items.into_iter()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut items: Vec<&mut Tensor> = Vec::new();
        for cnn in &mut self.cnns {
            for conv in &mut cnn.convs {
                items.push(&mut conv.kernel);
                items.push(&mut conv.bias);
            }
            items.push(&mut cnn.linear_w);
            items.push(&mut cnn.linear_b);
        }
        items
    }

    pub fn group_names(&self) -> Vec<String> {
        self.walk().map(|(k, _)| k).collect()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.walk()
            .flat_map(|(_, t)| t.data().to_vec())
            .collect()
    }

    pub fn flat_layout(&self) -> Vec<(String, usize, usize)> {
        let mut out = Vec::new();
        let mut off = 0;
        for (k, t) in self.walk() {
            out.push((k, off, t.len()));
            off += t.len();
        }
        out
    }

    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<(), DiscError> {
        let expected = self.num_params();
        if flat.len() != expected {
            return Err(DiscError::Config(format!(
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

    pub fn to_bundle(&self) -> BTreeMap<String, Tensor> {
        self.walk().map(|(k, t)| (k, t.clone())).collect()
    }

    /// Load and validate the complete key set for `config`.
    pub fn from_bundle(
        bundle: &BTreeMap<String, Tensor>,
        config: &DiscConfig,
    ) -> Result<Self, DiscError> {
        let mut params = Self::zeros(config)?;
        let expected: Vec<(String, Vec<usize>)> = params
            .walk()
            .map(|(k, t)| (k, t.shape().to_vec()))
            .collect();
        for key in bundle.keys() {
            if !expected.iter().any(|(k, _)| k == key) {
                return Err(DiscError::UnexpectedKey(key.clone()));
            }
        }
        let mut values = Vec::with_capacity(expected.len());
        for (key, shape) in &expected {
            let t = bundle
                .get(key)
                .ok_or_else(|| DiscError::MissingKey(key.clone()))?;
            if t.shape() != shape.as_slice() {
                return Err(DiscError::Config(format!(
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
