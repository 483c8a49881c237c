//! Dense row-major tensors in double precision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from tensor construction and the numeric kernels.
#[derive(Debug, Error)]
pub enum NumError {
    #[error("{op}: shape mismatch {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{op}: invalid shape {shape:?}: {reason}")]
    BadShape {
        op: &'static str,
        shape: Vec<usize>,
        reason: String,
    },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

/// Dense tensor: a shape and a flat row-major `f64` buffer.
///
/// Every dimension is at least 1 and `data.len()` equals the product of
/// the dimensions. Values arriving from external input (JSON) are
/// rejected if non-finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr", into = "TensorRepr")]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Wire form: `{"shape":[...],"data":[...]}`.
#[derive(Serialize, Deserialize)]
struct TensorRepr {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<TensorRepr> for Tensor {
    type Error = NumError;
    fn try_from(r: TensorRepr) -> Result<Self, NumError> {
        Tensor::new(r.shape, r.data)
    }
}

impl From<Tensor> for TensorRepr {
    fn from(t: Tensor) -> TensorRepr {
        TensorRepr {
            shape: t.shape,
            data: t.data,
        }
    }
}

impl Tensor {
    /// Checked constructor: validates the shape/data contract and
    /// rejects NaN and infinity.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, NumError> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(NumError::BadShape {
                op: "Tensor::new",
                shape,
                reason: "every dimension must be >= 1".into(),
            });
        }
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(NumError::BadShape {
                op: "Tensor::new",
                shape,
                reason: format!("product of dims != data length {}", data.len()),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(NumError::NonFinite { index });
        }
        Ok(Tensor { shape, data })
    }

    /// Internal constructor for kernel outputs; shape contract checked,
    /// finiteness not re-scanned.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        debug_assert!(!shape.is_empty() && shape.iter().all(|&d| d >= 1));
        Tensor { shape, data }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let numel = shape.iter().product();
        Tensor::from_parts(shape.to_vec(), vec![0.0; numel])
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let numel = shape.iter().product();
        Tensor::from_parts(shape.to_vec(), vec![value; numel])
    }

    /// Identity matrix of side n.
    pub fn eye(n: usize) -> Self {
        let mut t = Tensor::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// Matrix from rows; all rows must share a length >= 1.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumError> {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(NumError::BadShape {
                op: "Tensor::from_rows",
                shape: vec![rows.len(), cols],
                reason: "rows must be non-empty and rectangular".into(),
            });
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Tensor::new(vec![rows.len(), cols], data)
    }

    /// Fill with uniform(-bound, bound) draws.
    pub fn uniform(shape: &[usize], bound: f64, rng: &mut crate::num::Rng) -> Self {
        let numel = shape.iter().product();
        let data = (0..numel).map(|_| rng.uniform(-bound, bound)).collect();
        Tensor::from_parts(shape.to_vec(), data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Row count of a matrix (first dimension).
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Column count of a matrix (second dimension).
    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    /// Row `i` of a 2-D tensor as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    /// Reinterpret the buffer under a new shape of equal element count.
    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor, NumError> {
        let numel: usize = shape.iter().product();
        if shape.is_empty() || shape.iter().any(|&d| d == 0) || numel != self.data.len() {
            return Err(NumError::ShapeMismatch {
                op: "reshape",
                lhs: self.shape.clone(),
                rhs: shape.to_vec(),
            });
        }
        Ok(Tensor::from_parts(shape.to_vec(), self.data.clone()))
    }

    /// Expect a 2-D tensor; report the offending shape otherwise.
    pub fn expect_matrix(&self, op: &'static str) -> Result<(usize, usize), NumError> {
        if self.shape.len() != 2 {
            return Err(NumError::BadShape {
                op,
                shape: self.shape.clone(),
                reason: "expected a 2-D tensor".into(),
            });
        }
        Ok((self.shape[0], self.shape[1]))
    }

    pub fn same_shape(&self, other: &Tensor) -> bool {
        self.shape == other.shape
    }

    /// Sum of all elements.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}
