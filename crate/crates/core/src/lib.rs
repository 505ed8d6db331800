//! Sparse recovery from uniformly quantized linear measurements.
//!
//! The decoders minimize `‖u‖_1` (or a total-variation seminorm) subject to an
//! `ℓ_p` fidelity tube `‖y_q - Φ u‖_p <= ε`. Larger moments `p` bring the
//! reconstruction closer to quantization consistency once the number of
//! measurements is large enough.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod prox;
pub mod quantize;
pub mod rng;
pub mod sensing;
pub mod serde_util;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
