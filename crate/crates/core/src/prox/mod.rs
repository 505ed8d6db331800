//! Proximity and projection operators used by the Douglas–Rachford decoders.

mod ball;
mod tube;
mod tv;

pub use ball::{newton_init, project_ball, project_ball_detailed, BallProjection, NewtonState};
pub use tube::{prox_affine_composition, InnerStats, Tube, TubeProjector};
pub use tv::{prox_tv, prox_tv_detailed, tv_norm, TvOutcome};
pub(crate) use tv::tv_prox_real_block;

use crate::linalg::lp_norm;

/// Component-wise soft thresholding, the proximity operator of `γ‖·‖_1`.
pub fn soft_threshold(x: &[f64], gamma: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| v.signum() * (v.abs() - gamma).max(0.0))
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect()
}

/// Normalized duality mapping of `ℓ_p`:
/// `J(u)_i = ‖u‖_p^{2-p} |u_i|^{p-1} sign(u_i)`, the gradient of `½‖u‖_p²`.
/// Maps `0` to `0`.
pub fn duality_map(u: &[f64], p: f64) -> Vec<f64> {
    let norm = lp_norm(u, p);
    if norm == 0.0 {
        return vec![0.0; u.len()];
    }
    // ‖u‖^{2-p} |u_i|^{p-1} = ‖u‖ (|u_i| / ‖u‖)^{p-1}, which stays finite for large p
    u.iter()
        .map(|&v| norm * (v.abs() / norm).powf(p - 1.0) * v.signum())
        .collect()
}
