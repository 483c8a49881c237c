//! Numeric kernels with analytic vector-Jacobian products.
//!
//! Every kernel fixes its floating-point summation order so repeated
//! runs are bit-identical: matmul sums over the contraction index in
//! ascending order, conv2d iterates output-major then C_in, kh, kw,
//! and the reductions walk the buffer in row-major order.

use super::rng::Rng;
use super::tensor::{NumError, Tensor};

// ---------------------------------------------------------------------------
// matmul
// ---------------------------------------------------------------------------

/// Matrix product of `a` ([m,k]) and `b` ([k,n]).
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor, NumError> {
    let (m, ka) = a.expect_matrix("matmul")?;
    let (kb, n) = b.expect_matrix("matmul")?;
    if ka != kb {
        return Err(NumError::ShapeMismatch {
            op: "matmul",
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        });
    }
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let arow = a.row(i);
        for j in 0..n {
            let mut acc = 0.0;
            for (k, &av) in arow.iter().enumerate() {
                acc += av * b.data()[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    Ok(Tensor::from_parts(vec![m, n], out))
}

/// VJP of matmul: `ga = g bᵀ`, `gb = aᵀ g`.
pub fn matmul_vjp(a: &Tensor, b: &Tensor, g: &Tensor) -> (Tensor, Tensor) {
    let (m, k) = (a.rows(), a.cols());
    let n = b.cols();
    debug_assert_eq!(g.shape(), &[m, n]);
    let mut ga = vec![0.0; m * k];
    for i in 0..m {
        let grow = g.row(i);
        for kk in 0..k {
            let mut acc = 0.0;
            for (j, &gv) in grow.iter().enumerate() {
                acc += gv * b.data()[kk * n + j];
            }
            ga[i * k + kk] = acc;
        }
    }
    let mut gb = vec![0.0; k * n];
    for kk in 0..k {
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..m {
                acc += a.data()[i * k + kk] * g.data()[i * n + j];
            }
            gb[kk * n + j] = acc;
        }
    }
    (
        Tensor::from_parts(vec![m, k], ga),
        Tensor::from_parts(vec![k, n], gb),
    )
}

/// Transpose of a 2-D tensor.
pub fn transpose(a: &Tensor) -> Result<Tensor, NumError> {
    let (m, n) = a.expect_matrix("transpose")?;
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            out[j * m + i] = a.data()[i * n + j];
        }
    }
    Ok(Tensor::from_parts(vec![n, m], out))
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

fn zip_same_shape(
    op: &'static str,
    a: &Tensor,
    b: &Tensor,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Tensor, NumError> {
    if !a.same_shape(b) {
        return Err(NumError::ShapeMismatch {
            op,
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        });
    }
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| f(x, y))
        .collect();
    Ok(Tensor::from_parts(a.shape().to_vec(), data))
}

/// Elementwise sum; both gradients are the upstream gradient unchanged.
pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor, NumError> {
    zip_same_shape("add", a, b, |x, y| x + y)
}

/// Elementwise (Hadamard) product.
pub fn mul(a: &Tensor, b: &Tensor) -> Result<Tensor, NumError> {
    zip_same_shape("mul", a, b, |x, y| x * y)
}

/// VJP of mul: `(g ⊙ b, g ⊙ a)`.
pub fn mul_vjp(a: &Tensor, b: &Tensor, g: &Tensor) -> (Tensor, Tensor) {
    let ga = mul(g, b).expect("mul_vjp shapes");
    let gb = mul(g, a).expect("mul_vjp shapes");
    (ga, gb)
}

/// Multiply every element by a scalar.
pub fn scale(a: &Tensor, s: f64) -> Tensor {
    let data = a.data().iter().map(|&x| x * s).collect();
    Tensor::from_parts(a.shape().to_vec(), data)
}

/// Add a bias row ([n]) to every row of a matrix ([m,n]).
pub fn add_bias(mat: &Tensor, bias: &Tensor) -> Result<Tensor, NumError> {
    let (m, n) = mat.expect_matrix("add_bias")?;
    if bias.shape() != [n] {
        return Err(NumError::ShapeMismatch {
            op: "add_bias",
            lhs: mat.shape().to_vec(),
            rhs: bias.shape().to_vec(),
        });
    }
    let mut data = mat.data().to_vec();
    for i in 0..m {
        for j in 0..n {
            data[i * n + j] += bias.data()[j];
        }
    }
    Ok(Tensor::from_parts(vec![m, n], data))
}

/// Bias side of the add_bias VJP: column sums of the upstream gradient.
pub fn colsum(g: &Tensor) -> Tensor {
    let (m, n) = (g.rows(), g.cols());
    let mut out = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            out[j] += g.data()[i * n + j];
        }
    }
    Tensor::from_parts(vec![n], out)
}

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

pub fn sigmoid(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect();
    Tensor::from_parts(x.shape().to_vec(), data)
}

/// VJP of sigmoid given the forward output `y`.
pub fn sigmoid_vjp(y: &Tensor, g: &Tensor) -> Tensor {
    let data = y
        .data()
        .iter()
        .zip(g.data())
        .map(|(&yv, &gv)| gv * yv * (1.0 - yv))
        .collect();
    Tensor::from_parts(y.shape().to_vec(), data)
}

pub fn tanh(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| v.tanh()).collect();
    Tensor::from_parts(x.shape().to_vec(), data)
}

/// VJP of tanh given the forward output `y`.
pub fn tanh_vjp(y: &Tensor, g: &Tensor) -> Tensor {
    let data = y
        .data()
        .iter()
        .zip(g.data())
        .map(|(&yv, &gv)| gv * (1.0 - yv * yv))
        .collect();
    Tensor::from_parts(y.shape().to_vec(), data)
}

/// Leaky ReLU: `x` for `x >= 0`, `slope * x` otherwise.
pub fn leaky_relu(x: &Tensor, slope: f64) -> Tensor {
    let data = x
        .data()
        .iter()
        .map(|&v| if v >= 0.0 { v } else { slope * v })
        .collect();
    Tensor::from_parts(x.shape().to_vec(), data)
}

/// VJP of leaky ReLU given the forward input `x`.
pub fn leaky_relu_vjp(x: &Tensor, slope: f64, g: &Tensor) -> Tensor {
    let data = x
        .data()
        .iter()
        .zip(g.data())
        .map(|(&xv, &gv)| if xv >= 0.0 { gv } else { slope * gv })
        .collect();
    Tensor::from_parts(x.shape().to_vec(), data)
}

// ---------------------------------------------------------------------------
// reductions and row plumbing
// ---------------------------------------------------------------------------

/// Mean of a 2-D tensor over one axis: axis 0 collapses rows (output
/// [cols]), axis 1 collapses columns (output [rows]).
pub fn mean_over_axis(x: &Tensor, axis: usize) -> Result<Tensor, NumError> {
    let (m, n) = x.expect_matrix("mean_over_axis")?;
    match axis {
        0 => {
            let mut out = vec![0.0; n];
            for i in 0..m {
                for j in 0..n {
                    out[j] += x.data()[i * n + j];
                }
            }
            for v in &mut out {
                *v /= m as f64;
            }
            Ok(Tensor::from_parts(vec![n], out))
        }
        1 => {
            let mut out = vec![0.0; m];
            for i in 0..m {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += x.data()[i * n + j];
                }
                out[i] = acc / n as f64;
            }
            Ok(Tensor::from_parts(vec![m], out))
        }
        other => Err(NumError::Config(format!(
            "mean_over_axis: axis {other} out of range for a 2-D tensor"
        ))),
    }
}

/// VJP of mean_over_axis: spreads each output gradient evenly over the
/// collapsed axis.
pub fn mean_over_axis_vjp(x_shape: &[usize], axis: usize, g: &Tensor) -> Tensor {
    let (m, n) = (x_shape[0], x_shape[1]);
    let mut out = vec![0.0; m * n];
    match axis {
        0 => {
            for i in 0..m {
                for j in 0..n {
                    out[i * n + j] = g.data()[j] / m as f64;
                }
            }
        }
        1 => {
            for i in 0..m {
                for j in 0..n {
                    out[i * n + j] = g.data()[i] / n as f64;
                }
            }
        }
        _ => unreachable!("axis validated in forward"),
    }
    Tensor::from_parts(vec![m, n], out)
}

/// Stack matrices with equal column counts on top of each other.
pub fn concat_rows(parts: &[&Tensor]) -> Result<Tensor, NumError> {
    if parts.is_empty() {
        return Err(NumError::Config("concat_rows: empty input list".into()));
    }
    let (_, n) = parts[0].expect_matrix("concat_rows")?;
    let mut rows = 0;
    for p in parts {
        let (pm, pn) = p.expect_matrix("concat_rows")?;
        if pn != n {
            return Err(NumError::ShapeMismatch {
                op: "concat_rows",
                lhs: parts[0].shape().to_vec(),
                rhs: p.shape().to_vec(),
            });
        }
        rows += pm;
    }
    let mut data = Vec::with_capacity(rows * n);
    for p in parts {
        data.extend_from_slice(p.data());
    }
    Ok(Tensor::from_parts(vec![rows, n], data))
}

/// Inverse of [`concat_rows`]: slice a matrix into consecutive row blocks.
pub fn split_rows(x: &Tensor, sizes: &[usize]) -> Result<Vec<Tensor>, NumError> {
    let (m, n) = x.expect_matrix("split_rows")?;
    let total: usize = sizes.iter().sum();
    if total != m {
        return Err(NumError::ShapeMismatch {
            op: "split_rows",
            lhs: vec![m, n],
            rhs: vec![total, n],
        });
    }
    let mut out = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in sizes {
        let data = x.data()[start * n..(start + s) * n].to_vec();
        out.push(Tensor::from_parts(vec![s, n], data));
        start += s;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

fn conv_out_dim(size: usize, k: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = size + 2 * padding;
    if k > padded || stride == 0 {
        return None;
    }
    Some((padded - k) / stride + 1)
}

/// 2-D cross-correlation of `input` ([C_in,H,W]) with `kernel`
/// ([C_out,C_in,kh,kw]); zero padding, identical stride in both dims.
pub fn conv2d(
    input: &Tensor,
    kernel: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<Tensor, NumError> {
    if input.ndim() != 3 || kernel.ndim() != 4 || input.shape()[0] != kernel.shape()[1] {
        return Err(NumError::ShapeMismatch {
            op: "conv2d",
            lhs: input.shape().to_vec(),
            rhs: kernel.shape().to_vec(),
        });
    }
    let (c_in, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (c_out, kh, kw) = (kernel.shape()[0], kernel.shape()[2], kernel.shape()[3]);
    let h_out = conv_out_dim(h, kh, stride, padding);
    let w_out = conv_out_dim(w, kw, stride, padding);
    let (h_out, w_out) = match (h_out, w_out) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(NumError::BadShape {
                op: "conv2d",
                shape: input.shape().to_vec(),
                reason: format!(
                    "kernel {kh}x{kw} with stride {stride}, padding {padding} \
                     yields a degenerate output"
                ),
            })
        }
    };
    let mut out = vec![0.0; c_out * h_out * w_out];
    for co in 0..c_out {
        for oy in 0..h_out {
            for ox in 0..w_out {
                let mut acc = 0.0;
                for ci in 0..c_in {
                    for ky in 0..kh {
                        let iy = (oy * stride + ky) as isize - padding as isize;
                        if iy < 0 || iy as usize >= h {
                            continue;
                        }
                        for kx in 0..kw {
                            let ix = (ox * stride + kx) as isize - padding as isize;
                            if ix < 0 || ix as usize >= w {
                                continue;
                            }
                            let iv = input.data()[(ci * h + iy as usize) * w + ix as usize];
                            let kv = kernel.data()[((co * c_in + ci) * kh + ky) * kw + kx];
                            acc += iv * kv;
                        }
                    }
                }
                out[(co * h_out + oy) * w_out + ox] = acc;
            }
        }
    }
    Ok(Tensor::from_parts(vec![c_out, h_out, w_out], out))
}

/// VJP of conv2d with respect to both input and kernel.
pub fn conv2d_vjp(
    input: &Tensor,
    kernel: &Tensor,
    stride: usize,
    padding: usize,
    g: &Tensor,
) -> (Tensor, Tensor) {
    let (c_in, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (c_out, kh, kw) = (kernel.shape()[0], kernel.shape()[2], kernel.shape()[3]);
    let (h_out, w_out) = (g.shape()[1], g.shape()[2]);
    debug_assert_eq!(g.shape()[0], c_out);
    let mut gi = vec![0.0; c_in * h * w];
    let mut gk = vec![0.0; c_out * c_in * kh * kw];
    for co in 0..c_out {
        for oy in 0..h_out {
            for ox in 0..w_out {
                let gv = g.data()[(co * h_out + oy) * w_out + ox];
                for ci in 0..c_in {
                    for ky in 0..kh {
                        let iy = (oy * stride + ky) as isize - padding as isize;
                        if iy < 0 || iy as usize >= h {
                            continue;
                        }
                        for kx in 0..kw {
                            let ix = (ox * stride + kx) as isize - padding as isize;
                            if ix < 0 || ix as usize >= w {
                                continue;
                            }
                            let ii = (ci * h + iy as usize) * w + ix as usize;
                            let ki = ((co * c_in + ci) * kh + ky) * kw + kx;
                            gi[ii] += gv * kernel.data()[ki];
                            gk[ki] += gv * input.data()[ii];
                        }
                    }
                }
            }
        }
    }
    (
        Tensor::from_parts(vec![c_in, h, w], gi),
        Tensor::from_parts(vec![c_out, c_in, kh, kw], gk),
    )
}

/// Add one bias value per output channel of a [C,H,W] tensor.
pub fn add_channel_bias(x: &Tensor, bias: &Tensor) -> Result<Tensor, NumError> {
    if x.ndim() != 3 || bias.shape() != [x.shape()[0]] {
        return Err(NumError::ShapeMismatch {
            op: "add_channel_bias",
            lhs: x.shape().to_vec(),
            rhs: bias.shape().to_vec(),
        });
    }
    let (c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let mut data = x.data().to_vec();
    for ci in 0..c {
        for i in 0..h * w {
            data[ci * h * w + i] += bias.data()[ci];
        }
    }
    Ok(Tensor::from_parts(vec![c, h, w], data))
}

/// Bias side of the add_channel_bias VJP: per-channel sums.
pub fn channel_sum(g: &Tensor) -> Tensor {
    let (c, h, w) = (g.shape()[0], g.shape()[1], g.shape()[2]);
    let mut out = vec![0.0; c];
    for ci in 0..c {
        for i in 0..h * w {
            out[ci] += g.data()[ci * h * w + i];
        }
    }
    Tensor::from_parts(vec![c], out)
}

// ---------------------------------------------------------------------------
// instance norm
// ---------------------------------------------------------------------------

/// Per-channel normalization of a [C,H,W] tensor: `(x - mean)/sqrt(var + eps)`
/// with population variance and no learned affine.
pub fn instance_norm(x: &Tensor, eps: f64) -> Result<Tensor, NumError> {
    if x.ndim() != 3 {
        return Err(NumError::BadShape {
            op: "instance_norm",
            shape: x.shape().to_vec(),
            reason: "expected a [C,H,W] tensor".into(),
        });
    }
    if eps <= 0.0 {
        return Err(NumError::Config(format!(
            "instance_norm: eps must be > 0, got {eps}"
        )));
    }
    let (c, hw) = (x.shape()[0], x.shape()[1] * x.shape()[2]);
    let mut data = vec![0.0; c * hw];
    for ci in 0..c {
        let chan = &x.data()[ci * hw..(ci + 1) * hw];
        let mean = chan.iter().sum::<f64>() / hw as f64;
        let var = chan.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / hw as f64;
        let inv_std = 1.0 / (var + eps).sqrt();
        for (o, &v) in data[ci * hw..(ci + 1) * hw].iter_mut().zip(chan) {
            *o = (v - mean) * inv_std;
        }
    }
    Ok(Tensor::from_parts(x.shape().to_vec(), data))
}

/// VJP of instance_norm, recomputing the per-channel statistics.
///
/// With `y = (x - mean)/s`, the input gradient per channel is
/// `(g - mean(g) - y * mean(g ⊙ y)) / s`.
pub fn instance_norm_vjp(x: &Tensor, eps: f64, g: &Tensor) -> Tensor {
    let (c, hw) = (x.shape()[0], x.shape()[1] * x.shape()[2]);
    let mut out = vec![0.0; c * hw];
    for ci in 0..c {
        let chan = &x.data()[ci * hw..(ci + 1) * hw];
        let gchan = &g.data()[ci * hw..(ci + 1) * hw];
        let mean = chan.iter().sum::<f64>() / hw as f64;
        let var = chan.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / hw as f64;
        let inv_std = 1.0 / (var + eps).sqrt();
        let g_mean = gchan.iter().sum::<f64>() / hw as f64;
        let gy_mean = chan
            .iter()
            .zip(gchan)
            .map(|(&xv, &gv)| gv * (xv - mean) * inv_std)
            .sum::<f64>()
            / hw as f64;
        for (i, o) in out[ci * hw..(ci + 1) * hw].iter_mut().enumerate() {
            let y = (chan[i] - mean) * inv_std;
            *o = (gchan[i] - g_mean - y * gy_mean) * inv_std;
        }
    }
    Tensor::from_parts(x.shape().to_vec(), out)
}

// ---------------------------------------------------------------------------
// dropout
// ---------------------------------------------------------------------------

/// Multiplicative mask recorded by a training-mode dropout pass.
/// `None` means the pass was an identity (inference or rate 0).
#[derive(Debug, Clone)]
pub struct DropoutMask(Option<Vec<f64>>);

impl DropoutMask {
    pub fn identity() -> Self {
        DropoutMask(None)
    }

    pub fn factors(&self) -> Option<&[f64]> {
        self.0.as_deref()
    }
}

/// Inverted dropout: zero each element with probability `rate` and scale
/// survivors by `1/(1-rate)`; identity outside training.
pub fn dropout(
    x: &Tensor,
    rate: f64,
    rng: &mut Rng,
    training: bool,
) -> Result<(Tensor, DropoutMask), NumError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NumError::Config(format!(
            "dropout: rate must be in [0, 1), got {rate}"
        )));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), DropoutMask::identity()));
    }
    let keep_scale = 1.0 / (1.0 - rate);
    let factors: Vec<f64> = x
        .data()
        .iter()
        .map(|_| if rng.bernoulli(rate) { 0.0 } else { keep_scale })
        .collect();
    let data = x
        .data()
        .iter()
        .zip(&factors)
        .map(|(&v, &f)| v * f)
        .collect();
    Ok((
        Tensor::from_parts(x.shape().to_vec(), data),
        DropoutMask(Some(factors)),
    ))
}

/// VJP of dropout: multiply by the recorded mask.
pub fn dropout_vjp(mask: &DropoutMask, g: &Tensor) -> Tensor {
    match &mask.0 {
        None => g.clone(),
        Some(factors) => {
            let data = g
                .data()
                .iter()
                .zip(factors)
                .map(|(&gv, &f)| gv * f)
                .collect();
            Tensor::from_parts(g.shape().to_vec(), data)
        }
    }
}
