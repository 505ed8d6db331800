//! Projection onto the fidelity tube `T = {x : ‖y_q - Φ x‖_p <= ε}`.
//!
//! The tube indicator is `ι_B ∘ A_ε` with `A_ε(x) = (Φ x - y_q) / ε`, so its
//! proximity operator reduces to the `ℓ_p` ball projection: in closed form
//! when `Φ Φ^T = c Id`, otherwise through the dual forward–backward iteration
//!
//! ```text
//! s        = v / b + Φ p_t - y_q
//! v_{t+1}  = b (s - P_{εB}(s))
//! p_{t+1}  = x - Φ^T v_{t+1}
//! ```
//!
//! written here with the dual variable rescaled by `ε` (`b = 2/(c1+c2)` when
//! `c1 > 0`, else `1/c2`) so that `ε -> 0` stays well conditioned.

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, lp_norm};
use crate::sensing::{FrameBounds, LinearOperator};

use super::ball::{project_ball, BallProjection};

/// Feasibility slack accepted on exit of a strict projection.
pub const FEASIBILITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct Tube<'a> {
    pub op: &'a LinearOperator,
    pub y_q: &'a [f64],
    pub epsilon: f64,
    pub p: f64,
}

impl<'a> Tube<'a> {
    pub fn new(op: &'a LinearOperator, y_q: &'a [f64], epsilon: f64, p: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return invalid(format!("tube radius must be positive, got {epsilon}"));
        }
        if y_q.len() != op.rows() {
            return invalid(format!(
                "measurement vector has length {}, operator has {} rows",
                y_q.len(),
                op.rows()
            ));
        }
        if !(p >= 2.0) {
            return invalid(format!("tube moment must satisfy p >= 2, got {p}"));
        }
        Ok(Self { op, y_q, epsilon, p })
    }

    /// `‖y_q - Φ x‖_p`
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        let r: Vec<f64> = self.op.apply(x).iter().zip(self.y_q).map(|(a, b)| b - a).collect();
        lp_norm(&r, self.p)
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        self.residual_norm(x) <= self.epsilon * (1.0 + slack)
    }

    /// `P_{εB}(s) = ε P_B(s / ε)`
    fn project_scaled_ball(&self, s: &[f64], ball: &BallProjection) -> Result<Vec<f64>> {
        let e = self.epsilon;
        let scaled: Vec<f64> = s.iter().map(|v| v / e).collect();
        Ok(project_ball(&scaled, self.p, ball)?.into_iter().map(|v| v * e).collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InnerStats {
    pub calls: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
}

impl InnerStats {
    fn record(&mut self, iters: usize) {
        self.calls += 1;
        self.total_iterations += iters;
        self.max_iterations = self.max_iterations.max(iters);
    }
}

/// Stateful tube projector; keeps the dual variable between calls so
/// successive projections of nearby points start warm.
#[derive(Debug, Clone)]
pub struct TubeProjector<'a> {
    tube: Tube<'a>,
    bounds: FrameBounds,
    ball: BallProjection,
    dual: Vec<f64>,
    stats: InnerStats,
}

impl<'a> TubeProjector<'a> {
    pub fn new(tube: Tube<'a>, bounds: FrameBounds, ball: BallProjection) -> Result<Self> {
        if !(bounds.c2 > 0.0) || bounds.c1 < 0.0 || bounds.c1 > bounds.c2 {
            return invalid(format!("invalid frame bounds {bounds:?}"));
        }
        Ok(Self {
            dual: vec![0.0; tube.op.rows()],
            tube,
            bounds,
            ball,
            stats: InnerStats::default(),
        })
    }

    pub fn tube(&self) -> &Tube<'a> {
        &self.tube
    }

    pub fn stats(&self) -> InnerStats {
        self.stats
    }

    /// Projects `x` onto the tube.
    ///
    /// Tight frames use the one-shot formula. Otherwise the dual iteration runs
    /// until the relative change of the primal iterate drops below `tol`; with
    /// `strict` set it must additionally land inside the tube up to
    /// [`FEASIBILITY_SLACK`]. Exceeding `cap` is a convergence failure.
    pub fn project(&mut self, x: &[f64], tol: f64, cap: usize, strict: bool) -> Result<Vec<f64>> {
        if self.bounds.is_tight() {
            let out = self.project_tight(x)?;
            self.stats.record(1);
            return Ok(out);
        }
        self.project_dual(x, tol, cap, strict)
    }

    fn project_tight(&self, x: &[f64]) -> Result<Vec<f64>> {
        let Tube { op, y_q, .. } = self.tube;
        let c = self.bounds.c2;
        let r: Vec<f64> = op.apply(x).iter().zip(y_q).map(|(a, b)| a - b).collect();
        let pr = self.tube.project_scaled_ball(&r, &self.ball)?;
        let delta: Vec<f64> = pr.iter().zip(&r).map(|(a, b)| (a - b) / c).collect();
        let mut out = x.to_vec();
        axpy(1.0, &op.adjoint(&delta), &mut out);
        Ok(out)
    }

    fn project_dual(&mut self, x: &[f64], tol: f64, cap: usize, strict: bool) -> Result<Vec<f64>> {
        let Tube { op, y_q, epsilon, p } = self.tube;
        let FrameBounds { c1, c2 } = self.bounds;
        let b = if c1 > 0.0 { 2.0 / (c1 + c2) } else { 1.0 / c2 };
        // iterate in measurement space: Φ p_t = Φ x - Φ Φ^T v_t
        let phi_x = op.apply(x);
        let x_sq = dot(x, x);
        let mut gv = op.normal_apply(&self.dual);
        let mut iters = 0;
        let residual_of = |gv: &[f64]| -> Vec<f64> {
            phi_x.iter().zip(gv).zip(y_q).map(|((a, g), y)| y - (a - g)).collect()
        };
        loop {
            let s: Vec<f64> = self
                .dual
                .iter()
                .zip(&phi_x)
                .zip(&gv)
                .zip(y_q)
                .map(|(((v, a), g), y)| v / b + a - g - y)
                .collect();
            let proj = self.tube.project_scaled_ball(&s, &self.ball)?;
            let dv: Vec<f64> = self
                .dual
                .iter()
                .zip(&s)
                .zip(&proj)
                .map(|((v, si), pi)| b * (si - pi) - v)
                .collect();
            let gdv = op.normal_apply(&dv);
            axpy(1.0, &dv, &mut self.dual);
            axpy(1.0, &gdv, &mut gv);
            iters += 1;

            // ‖p_t - p_{t-1}‖² = dvᵀ Φ Φ^T dv,  ‖p_t‖² = ‖x‖² - 2 vᵀΦx + vᵀ Φ Φ^T v
            let change_sq = dot(&dv, &gdv).max(0.0);
            let p_sq = (x_sq - 2.0 * dot(&self.dual, &phi_x) + dot(&self.dual, &gv)).max(0.0);
            let change = (change_sq / p_sq.max(f64::MIN_POSITIVE)).sqrt();
            if !change.is_finite() {
                return Err(Error::NumericFailure("non-finite iterate in tube projection".into()));
            }
            let mut done = change < tol;
            if done && strict {
                done = lp_norm(&residual_of(&gv), p) <= epsilon * (1.0 + FEASIBILITY_SLACK);
            }
            if done {
                self.stats.record(iters);
                let mut out = x.to_vec();
                axpy(-1.0, &op.adjoint(&self.dual), &mut out);
                return Ok(out);
            }
            if iters >= cap {
                return Err(Error::ConvergenceFailure {
                    routine: "tube projection (dual forward-backward)",
                    iterations: iters,
                    residual: lp_norm(&residual_of(&gv), p) / epsilon - 1.0,
                });
            }
        }
    }
}

/// One-off projection of `x` onto the tube (cold dual start, strict
/// feasibility on exit).
pub fn prox_affine_composition(
    x: &[f64],
    tube: &Tube<'_>,
    bounds: &FrameBounds,
    inner_tol: f64,
    inner_cap: usize,
) -> Result<Vec<f64>> {
    if x.len() != tube.op.cols() {
        return invalid(format!(
            "signal has length {}, operator has {} columns",
            x.len(),
            tube.op.cols()
        ));
    }
    let mut projector = TubeProjector::new(*tube, *bounds, BallProjection::default())?;
    projector.project(x, inner_tol, inner_cap, true)
}
