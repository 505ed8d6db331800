//! Douglas–Rachford decoders.
//!
//! With `P` the projection onto the fidelity tube and `S` the proximity
//! operator of `γ` times the regularizer, the relaxed recursion
//!
//! ```text
//! x_{t+1} = (1 - α/2) x_t + (α/2) (2S - Id)(2P - Id)(x_t)
//! ```
//!
//! converges to a point whose tube projection solves
//! `min R(u) s.t. ‖y_q - Φ u‖_p <= ε`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dist2, norm1, norm2};
use crate::prox::{soft_threshold, tv_norm, BallProjection, InnerStats, Tube, TubeProjector};
use crate::prox::tv_prox_real_block;
use crate::sensing::{estimate_frame_bounds, FrameBounds, LinearOperator, OperatorKind};

/// Radius substituted for `ε = 0` (the basis-pursuit limit).
pub const BP_EPSILON: f64 = 1e-12;
/// Feasibility slack for a run to count as converged.
pub const CONVERGED_SLACK: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    L1,
    Tv,
}

impl std::str::FromStr for Regularizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Regularizer::L1),
            "tv" => Ok(Regularizer::Tv),
            other => invalid(format!("unknown regularizer `{other}` (expected l1 or tv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    /// Fidelity moment, `2 <= p <= ∞` (written `"inf"` in JSON).
    #[serde(with = "crate::serde_util::moment")]
    pub p: f64,
    /// Tube radius; 0 requests basis pursuit.
    pub epsilon: f64,
    /// Scale of the regularizer's proximity operator.
    pub gamma: f64,
    /// Constant relaxation in `(0, 2)`.
    pub alpha_t: f64,
    pub outer_iters: usize,
    /// Stop early once `‖x_{t+1} - x_t‖ / ‖x_t‖` falls below this.
    pub early_exit_tol: Option<f64>,
    /// Relative-change tolerance of the dual tube iteration.
    pub inner_tol: f64,
    pub inner_cap: usize,
    /// Iteration cap for the final, strictly feasible tube projection.
    pub final_cap: usize,
    pub regularizer: Regularizer,
    pub tv_tol: f64,
    pub tv_max_iter: usize,
    /// Power iterations used to bound `‖Φ‖²`.
    pub frame_iters: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            epsilon: 0.0,
            gamma: 1.0,
            alpha_t: 1.0,
            outer_iters: 500,
            early_exit_tol: None,
            inner_tol: 1e-6,
            inner_cap: 700,
            final_cap: 20_000,
            regularizer: Regularizer::L1,
            tv_tol: 1e-5,
            tv_max_iter: 200,
            frame_iters: 100,
            newton_tol: 1e-9,
            newton_max_iter: 50,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) {
            return invalid(format!("p must be at least 2, got {}", self.p));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return invalid(format!("epsilon must be finite and non-negative, got {}", self.epsilon));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return invalid(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.alpha_t > 0.0 && self.alpha_t < 2.0) {
            return invalid(format!("relaxation must lie in (0, 2), got {}", self.alpha_t));
        }
        if self.outer_iters == 0 || self.inner_cap == 0 || self.final_cap == 0 {
            return invalid("iteration counts must be positive");
        }
        if !(self.inner_tol > 0.0) {
            return invalid("inner tolerance must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// Recovered signal, in the operator's input space.
    pub x_hat: Vec<f64>,
    /// Regularizer value at `x_hat`.
    pub objective: f64,
    /// `‖y_q - Φ x_hat‖_p`
    pub residual_norm_p: f64,
    /// Radius actually used (`BP_EPSILON` when `ε = 0` was requested).
    pub epsilon_used: f64,
    pub outer_iterations_run: usize,
    /// Last relative change of the DR iterate.
    pub final_change: f64,
    pub inner_calls: usize,
    pub inner_iterations_total: usize,
    pub inner_iterations_max: usize,
    pub frame_bounds: FrameBounds,
    pub converged: bool,
}

/// `argmin ‖u‖_1` (or TV) subject to `‖y_q - Φ u‖_p <= ε`.
pub fn decode_bpdq(op: &LinearOperator, y_q: &[f64], cfg: &DecoderConfig) -> Result<DecodeResult> {
    cfg.validate()?;
    if y_q.len() != op.rows() {
        return invalid(format!(
            "got {} measurements for an operator with {} rows",
            y_q.len(),
            op.rows()
        ));
    }
    if y_q.iter().any(|v| !v.is_finite()) {
        return invalid("measurements must be finite");
    }
    let shape = match cfg.regularizer {
        Regularizer::L1 => None,
        Regularizer::Tv => match (op.kind(), op.dims()) {
            (OperatorKind::RestrictedFourier, Some(&[r, c])) => Some((r, c)),
            _ => return invalid("TV decoding needs a 2-D restricted Fourier operator"),
        },
    };

    let epsilon = if cfg.epsilon == 0.0 { BP_EPSILON } else { cfg.epsilon };
    let bounds = estimate_frame_bounds(op, cfg.frame_iters);
    if !(bounds.c2 > 0.0) {
        return Err(Error::NumericFailure("operator has zero norm".into()));
    }
    let tube = Tube::new(op, y_q, epsilon, cfg.p)?;
    let ball = BallProjection {
        tol: cfg.newton_tol,
        max_iter: cfg.newton_max_iter,
    };
    let mut projector = TubeProjector::new(tube, bounds, ball)?;

    let regularize = |v: &[f64]| -> Vec<f64> {
        match shape {
            None => soft_threshold(v, cfg.gamma),
            Some((r, c)) => tv_prox_real_block(v, r, c, cfg.gamma, cfg.tv_tol, cfg.tv_max_iter),
        }
    };

    let mut x: Vec<f64> = op.adjoint(y_q).into_iter().map(|v| v / bounds.c2).collect();
    let mut iterations = 0;
    let mut final_change = f64::INFINITY;
    for _ in 0..cfg.outer_iters {
        let px = projector.project(&x, cfg.inner_tol, cfg.inner_cap, false)?;
        let reflected: Vec<f64> = px.iter().zip(&x).map(|(p, xi)| 2.0 * p - xi).collect();
        let s = regularize(&reflected);
        let next: Vec<f64> = x
            .iter()
            .zip(&s)
            .zip(&px)
            .map(|((xi, si), pi)| xi + cfg.alpha_t * (si - pi))
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure(format!(
                "non-finite Douglas-Rachford iterate at step {}",
                iterations + 1
            )));
        }
        final_change = dist2(&next, &x) / norm2(&x).max(f64::MIN_POSITIVE);
        x = next;
        iterations += 1;
        if cfg.early_exit_tol.is_some_and(|t| final_change < t) {
            break;
        }
    }

    let (x_hat, strict_ok) = match projector.project(&x, cfg.inner_tol, cfg.final_cap, true) {
        Ok(v) => (v, true),
        Err(Error::ConvergenceFailure { .. }) => {
            (projector.project(&x, cfg.inner_tol, cfg.final_cap, false).unwrap_or(x), false)
        }
        Err(e) => return Err(e),
    };
    let residual = projector.tube().residual_norm(&x_hat);
    let objective = match shape {
        None => norm1(&x_hat),
        Some((r, c)) => tv_norm(
            ndarray::ArrayView2::from_shape((r, c), &x_hat[..r * c]).expect("image block"),
        ),
    };
    let InnerStats {
        calls,
        total_iterations,
        max_iterations,
    } = projector.stats();
    Ok(DecodeResult {
        converged: strict_ok && residual <= epsilon * (1.0 + CONVERGED_SLACK),
        x_hat,
        objective,
        residual_norm_p: residual,
        epsilon_used: epsilon,
        outer_iterations_run: iterations,
        final_change,
        inner_calls: calls,
        inner_iterations_total: total_iterations,
        inner_iterations_max: max_iterations,
        frame_bounds: bounds,
    })
}

/// Basis pursuit denoise: [`decode_bpdq`] with the `ℓ2` tube.
pub fn decode_bpdn(op: &LinearOperator, y_q: &[f64], cfg: &DecoderConfig) -> Result<DecodeResult> {
    let cfg = DecoderConfig { p: 2.0, ..cfg.clone() };
    decode_bpdq(op, y_q, &cfg)
}

/// TV-regularized decoder for real images measured by a 2-D restricted
/// Fourier operator.
pub fn decode_tv(op: &LinearOperator, y_q: &[f64], cfg: &DecoderConfig) -> Result<DecodeResult> {
    let cfg = DecoderConfig {
        regularizer: Regularizer::Tv,
        ..cfg.clone()
    };
    decode_bpdq(op, y_q, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::sensing::{make_partial_fourier, make_sgr};

    #[test]
    fn zero_measurements_decode_to_zero() {
        let op = make_sgr(20, 40, 1).unwrap();
        let y = vec![0.0; 20];
        let cfg = DecoderConfig {
            p: 4.0,
            epsilon: 0.1,
            ..Default::default()
        };
        let r = decode_bpdq(&op, &y, &cfg).unwrap();
        assert!(r.x_hat.iter().all(|v| *v == 0.0));
        let r = decode_bpdn(&op, &y, &cfg).unwrap();
        assert!(r.x_hat.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bpdn_is_the_p2_decoder() {
        let op = make_sgr(15, 30, 2).unwrap();
        let mut rng = Rng::new(3);
        let y = rng.normals(15);
        let cfg = DecoderConfig {
            p: 7.0,
            epsilon: 0.5,
            outer_iters: 50,
            ..Default::default()
        };
        let a = decode_bpdn(&op, &y, &cfg).unwrap();
        let b = decode_bpdq(&op, &y, &DecoderConfig { p: 2.0, ..cfg }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        let op = make_sgr(3, 5, 1).unwrap();
        let y = vec![0.0; 3];
        for cfg in [
            DecoderConfig { p: 1.5, ..Default::default() },
            DecoderConfig { gamma: 0.0, ..Default::default() },
            DecoderConfig { alpha_t: 2.0, ..Default::default() },
            DecoderConfig { epsilon: -1.0, ..Default::default() },
            DecoderConfig { regularizer: Regularizer::Tv, ..Default::default() },
        ] {
            assert!(matches!(decode_bpdq(&op, &y, &cfg), Err(Error::InvalidArgument(_))));
        }
        assert!(decode_bpdq(&op, &[0.0; 2], &DecoderConfig::default()).is_err());
    }

    #[test]
    fn constant_image_recovered_exactly() {
        let side = 8;
        let omega: Vec<usize> = (0..side * side).collect();
        let op = make_partial_fourier(&[side, side], &omega, 0).unwrap();
        let truth = vec![2.5; side * side];
        let y = op.apply(&op.embed_real(&truth));
        let cfg = DecoderConfig {
            outer_iters: 50,
            ..Default::default()
        };
        let r = decode_tv(&op, &y, &cfg).unwrap();
        assert!(r.converged);
        for (a, b) in r.x_hat[..side * side].iter().zip(&truth) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn empty_tube_is_not_converged() {
        // overdetermined and inconsistent: no point satisfies Φx = y
        let op = make_sgr(12, 4, 5).unwrap();
        let mut rng = Rng::new(6);
        let y = rng.normals(12);
        let cfg = DecoderConfig {
            outer_iters: 100,
            final_cap: 500,
            ..Default::default()
        };
        let r = decode_bpdq(&op, &y, &cfg).unwrap();
        assert!(!r.converged);
    }
}
