//! Dense-tensor kernels, deterministic randomness, and the
//! finite-difference harness that verifies every backward pass.

pub mod gradcheck;
pub mod ops;
pub mod rng;
pub mod tensor;

pub use gradcheck::{gradcheck, nudge_away_from_zero};
pub use rng::Rng;
pub use tensor::{NumError, Tensor};
