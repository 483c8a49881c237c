//! Multi-length adversarial scoring of mel-spectrograms.
//!
//! Three CNN discriminators score random clips of 32, 64, and 128
//! frames. Each CNN stacks strided conv layers (LeakyReLU and dropout
//! after every conv; instance norm after all but the first), then a
//! linear head projects the flattened features to one real/fake score.
//! Windows longer than an input are skipped rather than padded.

pub mod params;

pub use params::{
    ConvLayerParams, CnnParams, DiscConfig, DiscriminatorParams, KERNEL, PADDING, STRIDE,
};

use crate::num::{ops, NumError, Rng, Tensor};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiscError {
    #[error("window {window} unavailable: input has only {t_frames} frames")]
    WindowUnavailable { window: usize, t_frames: usize },
    #[error(
        "input too short: no configured window fits (real {real_frames} frames, \
         fake {fake_frames} frames, smallest window {min_window})"
    )]
    InputTooShort {
        real_frames: usize,
        fake_frames: usize,
        min_window: usize,
    },
    #[error("missing parameter key: {0}")]
    MissingKey(String),
    #[error("unexpected parameter key: {0}")]
    UnexpectedKey(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// A mel-spectrogram: frames on the first axis, mel bins on the second.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    frames: Tensor,
}

impl MelSpectrogram {
    pub fn new(frames: Tensor) -> Result<Self, DiscError> {
        frames.expect_matrix("MelSpectrogram::new")?;
        Ok(MelSpectrogram { frames })
    }

    pub fn num_frames(&self) -> usize {
        self.frames.rows()
    }

    pub fn n_mels(&self) -> usize {
        self.frames.cols()
    }

    pub fn frames(&self) -> &Tensor {
        &self.frames
    }
}

/// Slice a random contiguous window of `win` frames; the start index is
/// uniform over every valid position and is returned alongside the
/// clip.
pub fn sample_window(
    mel: &MelSpectrogram,
    win: usize,
    rng: &mut Rng,
) -> Result<(Tensor, usize), DiscError> {
    let t = mel.num_frames();
    if t < win || win == 0 {
        return Err(DiscError::WindowUnavailable {
            window: win,
            t_frames: t,
        });
    }
    let start = rng.below(t - win + 1);
    let d = mel.n_mels();
    let mut data = Vec::with_capacity(win * d);
    for r in start..start + win {
        data.extend_from_slice(mel.frames.row(r));
    }
    Ok((Tensor::from_parts(vec![win, d], data), start))
}

/// Intermediates of one CNN forward pass.
pub struct DiscCache {
    /// per conv layer: (input, pre-activation, activation, dropout mask,
    /// dropout output)
    stages: Vec<ConvStage>,
    flat: Tensor,
}

struct ConvStage {
    input: Tensor,
    pre_act: Tensor,
    mask: ops::DropoutMask,
    dropped: Tensor,
}

/// Score one clip with one window's CNN. The clip is viewed as a
/// 1 x win x n_mels image. Inference mode is deterministic; training
/// mode draws dropout masks from `rng`.
pub fn disc_forward(
    clip: &Tensor,
    cnn: &CnnParams,
    config: &DiscConfig,
    rng: &mut Rng,
    training: bool,
) -> Result<(f64, DiscCache), DiscError> {
    let (win, mels) = clip.expect_matrix("disc_forward")?;
    if win != cnn.window || mels != config.n_mels {
        return Err(DiscError::Num(NumError::ShapeMismatch {
            op: "disc_forward",
            lhs: clip.shape().to_vec(),
            rhs: vec![cnn.window, config.n_mels],
        }));
    }
    let mut x = clip.reshape(&[1, win, mels]).map_err(DiscError::Num)?;
    let mut stages = Vec::with_capacity(cnn.convs.len());
    for (i, conv) in cnn.convs.iter().enumerate() {
        let input = x;
        let pre = ops::add_channel_bias(
            &ops::conv2d(&input, &conv.kernel, STRIDE, PADDING)?,
            &conv.bias,
        )?;
        let act = ops::leaky_relu(&pre, config.leaky_slope);
        let (dropped, mask) = ops::dropout(&act, config.dropout_rate, rng, training)?;
        x = if i >= 1 {
            ops::instance_norm(&dropped, config.instnorm_eps)?
        } else {
            dropped.clone()
        };
        stages.push(ConvStage {
            input,
            pre_act: pre,
            mask,
            dropped,
        });
    }
    let flat = x.reshape(&[1, x.len()]).map_err(DiscError::Num)?;
    let score_mat = ops::add_bias(&ops::matmul(&flat, &cnn.linear_w)?, &cnn.linear_b)?;
    let score = score_mat.data()[0];
    Ok((score, DiscCache { stages, flat }))
}

/// Backward pass of [`disc_forward`]: gradients of `g_score * score`
/// with respect to the clip and every CNN parameter (returned in a
/// [`CnnParams`]-shaped container).
pub fn disc_backward(
    cnn: &CnnParams,
    config: &DiscConfig,
    cache: &DiscCache,
    g_score: f64,
) -> (Tensor, CnnParams) {
    let g_out = Tensor::from_parts(vec![1, 1], vec![g_score]);
    let (g_flat, g_lw) = ops::matmul_vjp(&cache.flat, &cnn.linear_w, &g_out);
    let g_lb = ops::colsum(&g_out);

    let mut grads = CnnParams {
        window: cnn.window,
        convs: cnn
            .convs
            .iter()
            .map(|c| ConvLayerParams {
                kernel: Tensor::zeros(c.kernel.shape()),
                bias: Tensor::zeros(c.bias.shape()),
            })
            .collect(),
        linear_w: g_lw,
        linear_b: g_lb,
    };

    let last_shape = if let Some(stage) = cache.stages.last() {
        stage.dropped.shape().to_vec()
    } else {
        vec![1, 1, 1]
    };
    let mut g = g_flat.reshape(&last_shape).expect("flatten round trip");
    for (i, (stage, conv)) in cache.stages.iter().zip(&cnn.convs).enumerate().rev() {
        if i >= 1 {
            g = ops::instance_norm_vjp(&stage.dropped, config.instnorm_eps, &g);
        }
        g = ops::dropout_vjp(&stage.mask, &g);
        g = ops::leaky_relu_vjp(&stage.pre_act, config.leaky_slope, &g);
        grads.convs[i].bias = ops::channel_sum(&g);
        let (g_input, g_kernel) = ops::conv2d_vjp(&stage.input, &conv.kernel, STRIDE, PADDING, &g);
        grads.convs[i].kernel = g_kernel;
        g = g_input;
    }
    let clip_shape = [cnn.window, config.n_mels];
    (g.reshape(&clip_shape).expect("image round trip"), grads)
}

/// Adversarial objective family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossFamily {
    /// Least-squares GAN: d = ((D_r - 1)^2 + D_f^2)/2, g = (D_f - 1)^2 / 2.
    LeastSquares,
    /// Hinge: d = max(0, 1 - D_r) + max(0, 1 + D_f), g = -D_f.
    Hinge,
}

/// Per-window scores and losses.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowLoss {
    pub window: usize,
    pub real_start: usize,
    pub fake_start: usize,
    pub real_score: f64,
    pub fake_score: f64,
    pub d_loss: f64,
    pub g_loss: f64,
}

/// Ensemble losses: means over the available windows.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialLosses {
    pub d_loss: f64,
    pub g_loss: f64,
    pub per_window: Vec<WindowLoss>,
}

/// Score one random real and one random fake clip per available window
/// and aggregate the adversarial losses. Windows longer than either
/// input are skipped; it is an error when none fits.
pub fn adversarial_losses(
    real: &MelSpectrogram,
    fake: &MelSpectrogram,
    params: &DiscriminatorParams,
    rng: &mut Rng,
    family: LossFamily,
    training: bool,
) -> Result<AdversarialLosses, DiscError> {
    if real.n_mels() != fake.n_mels() {
        return Err(DiscError::Num(NumError::ShapeMismatch {
            op: "adversarial_losses",
            lhs: real.frames.shape().to_vec(),
            rhs: fake.frames.shape().to_vec(),
        }));
    }
    let mut per_window = Vec::new();
    for cnn in &params.cnns {
        let w = cnn.window;
        if real.num_frames() < w || fake.num_frames() < w {
            continue;
        }
        let (real_clip, real_start) = sample_window(real, w, rng)?;
        let (fake_clip, fake_start) = sample_window(fake, w, rng)?;
        let (real_score, _) = disc_forward(&real_clip, cnn, &params.config, rng, training)?;
        let (fake_score, _) = disc_forward(&fake_clip, cnn, &params.config, rng, training)?;
        let (d_loss, g_loss) = match family {
            LossFamily::LeastSquares => (
                0.5 * ((real_score - 1.0).powi(2) + fake_score.powi(2)),
                0.5 * (fake_score - 1.0).powi(2),
            ),
            LossFamily::Hinge => (
                (1.0 - real_score).max(0.0) + (1.0 + fake_score).max(0.0),
                -fake_score,
            ),
        };
        per_window.push(WindowLoss {
            window: w,
            real_start,
            fake_start,
            real_score,
            fake_score,
            d_loss,
            g_loss,
        });
    }
    if per_window.is_empty() {
        return Err(DiscError::InputTooShort {
            real_frames: real.num_frames(),
            fake_frames: fake.num_frames(),
            min_window: params.config.windows.iter().copied().min().unwrap_or(0),
        });
    }
    let k = per_window.len() as f64;
    Ok(AdversarialLosses {
        d_loss: per_window.iter().map(|w| w.d_loss).sum::<f64>() / k,
        g_loss: per_window.iter().map(|w| w.g_loss).sum::<f64>() / k,
        per_window,
    })
}
