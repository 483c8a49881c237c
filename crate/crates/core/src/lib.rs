//! Syntax-aware prosody building blocks for non-autoregressive TTS:
//! dependency trees become heterogeneous syntactic graphs, a gated
//! graph-convolution encoder aggregates pooled phoneme encodings over
//! them, and a multi-length CNN discriminator scores mel-spectrogram
//! clips. Forward passes are pinned by independent reference oracles
//! and every backward pass is checked against central finite
//! differences.

pub mod disc;
pub mod encoder;
pub mod graph;
pub mod num;
pub mod testing;

pub use disc::DiscError;
pub use encoder::EncoderError;
pub use graph::GraphError;
pub use num::{NumError, Rng, Tensor};
