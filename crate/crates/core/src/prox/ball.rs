//! Euclidean projection onto the unit `ℓ_p` ball.
//!
//! For `2 < p < ∞` the projection of `y` (taken in the positive orthant) solves
//! the KKT system `F(u, λ) = 0` with
//!
//! ```text
//! F_i     = u_i + p λ u_i^{p-1} - y_i        (i < m)
//! F_{m}   = Σ_j u_j^p - 1
//! ```
//!
//! by Newton's method. The Jacobian is `[[D, b], [bᵀ, 0]]` with `D` diagonal,
//! so each step costs `O(m)` through its block inverse.

use crate::error::{invalid, Error, Result};
use crate::linalg::{abs_pow, lp_norm, norm2};

/// Moments within this distance of 2 (or above `1/P_CLOSED_FORM_EPS`) use the
/// closed forms.
const P_CLOSED_FORM_EPS: f64 = 1e-9;
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallProjection {
    /// Target for `‖F(z)‖_2`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BallProjection {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 50 }
    }
}

/// Newton iterate `z = (u, λ)` with its KKT residual.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonState {
    pub z: Vec<f64>,
    pub kkt_residual: f64,
    pub iteration: usize,
}

impl NewtonState {
    pub fn u(&self) -> &[f64] {
        &self.z[..self.z.len() - 1]
    }

    pub fn lambda(&self) -> f64 {
        self.z[self.z.len() - 1]
    }
}

/// `u^(p-2)`, by repeated multiplication when `p` is a small integer.
#[inline]
fn pow_pm2(u: f64, p: f64) -> f64 {
    if p == 4.0 {
        u * u
    } else if p == 10.0 {
        let u2 = u * u;
        let u4 = u2 * u2;
        u4 * u4
    } else if p == 3.0 {
        u
    } else {
        abs_pow(u, p - 2.0)
    }
}

/// KKT residual `F(u, λ)` into `out`; `pw` receives `u_i^(p-2)`.
fn kkt_residual(y: &[f64], u: &[f64], lambda: f64, p: f64, out: &mut [f64], pw: &mut [f64]) -> f64 {
    let m = y.len();
    let mut sum_p = 0.0;
    for i in 0..m {
        let up2 = pow_pm2(u[i], p);
        pw[i] = up2;
        let up1 = up2 * u[i];
        out[i] = u[i] + p * lambda * up1 - y[i];
        sum_p += up1 * u[i];
    }
    out[m] = sum_p - 1.0;
    norm2(out)
}

/// Starting point: radial projection `u⁰ = y / ‖y‖_p` and the `λ` minimizing
/// `‖F(u⁰, λ)‖_2`. The last KKT component vanishes at `u⁰`, so `λ⁰` is a
/// scalar least-squares fit.
pub fn newton_init(y_abs: &[f64], p: f64) -> NewtonState {
    let norm = lp_norm(y_abs, p);
    let u: Vec<f64> = y_abs.iter().map(|v| v / norm).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for (ui, yi) in u.iter().zip(y_abs) {
        let b = p * pow_pm2(*ui, p) * ui;
        num += b * (yi - ui);
        den += b * b;
    }
    let lambda = if den > 0.0 { num / den } else { 0.0 };
    let mut z = u;
    z.push(lambda);
    let mut f = vec![0.0; z.len()];
    let mut pw = vec![0.0; y_abs.len()];
    let kkt = kkt_residual(y_abs, &z[..y_abs.len()], lambda, p, &mut f, &mut pw);
    NewtonState {
        z,
        kkt_residual: kkt,
        iteration: 0,
    }
}

/// Projection onto `{u : ‖u‖_p <= 1}` for `p ∈ [2, ∞]`.
pub fn project_ball(y: &[f64], p: f64, cfg: &BallProjection) -> Result<Vec<f64>> {
    project_ball_detailed(y, p, cfg).map(|(u, _)| u)
}

/// As [`project_ball`], also returning the final Newton state when the Newton
/// route was taken.
pub fn project_ball_detailed(
    y: &[f64],
    p: f64,
    cfg: &BallProjection,
) -> Result<(Vec<f64>, Option<NewtonState>)> {
    if !(p >= 2.0) {
        return invalid(format!("ball projection needs p >= 2, got {p}"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("non-finite point passed to ball projection".into()));
    }
    if p - 2.0 <= P_CLOSED_FORM_EPS {
        let n = norm2(y);
        return Ok(if n <= 1.0 {
            (y.to_vec(), None)
        } else {
            (y.iter().map(|v| v / n).collect(), None)
        });
    }
    if p.is_infinite() || p >= 1.0 / P_CLOSED_FORM_EPS {
        return Ok((y.iter().map(|v| v.signum() * v.abs().min(1.0)).collect(), None));
    }
    if lp_norm(y, p) <= 1.0 {
        return Ok((y.to_vec(), None));
    }
    let y_abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let state = newton_solve(&y_abs, p, cfg)?;
    let u = state
        .u()
        .iter()
        .zip(y)
        .map(|(ui, yi)| if *yi < 0.0 { -ui } else { *ui })
        .collect();
    Ok((u, Some(state)))
}

fn newton_solve(y: &[f64], p: f64, cfg: &BallProjection) -> Result<NewtonState> {
    let m = y.len();
    let mut state = newton_init(y, p);
    let scale = norm2(y).max(1.0);
    // below this the residual is rounding noise
    let floor = 64.0 * f64::EPSILON * scale * (m as f64 + 1.0).sqrt();

    let mut f = vec![0.0; m + 1];
    let mut d_inv = vec![0.0; m];
    let mut b_bar = vec![0.0; m];
    let mut step = vec![0.0; m + 1];
    let mut trial_u = vec![0.0; m];
    let mut trial_f = vec![0.0; m + 1];
    let mut pw = vec![0.0; m];
    let mut trial_pw = vec![0.0; m];

    let mut res = kkt_residual(y, state.u(), state.lambda(), p, &mut f, &mut pw);
    while res >= cfg.tol && res > floor {
        if state.iteration >= cfg.max_iter {
            return Err(Error::ConvergenceFailure {
                routine: "l_p ball projection (Newton)",
                iterations: state.iteration,
                residual: res,
            });
        }
        let lambda = state.lambda();
        let u = &state.z[..m];
        // block inverse of [[D, b], [bᵀ, 0]] applied to F
        let mut mu = 0.0;
        let mut bbar_dot_r = 0.0;
        for i in 0..m {
            let up2 = pw[i];
            let d = 1.0 + p * (p - 1.0) * lambda * up2;
            let b = p * up2 * u[i];
            d_inv[i] = 1.0 / d;
            b_bar[i] = b * d_inv[i];
            mu += b * b_bar[i];
            bbar_dot_r += b_bar[i] * f[i];
        }
        if !(mu > 0.0) || d_inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("singular KKT Jacobian in ball projection".into()));
        }
        let dl = (bbar_dot_r - f[m]) / mu;
        for i in 0..m {
            step[i] = d_inv[i] * f[i] - b_bar[i] * dl;
        }
        step[m] = dl;

        // damped update: keep u in the orthant and do not increase ‖F‖
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let mut ok = true;
            for i in 0..m {
                trial_u[i] = state.z[i] - t * step[i];
                if trial_u[i] < 0.0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                let trial_lambda = lambda - t * step[m];
                let trial_res = kkt_residual(y, &trial_u, trial_lambda, p, &mut trial_f, &mut trial_pw);
                if trial_res <= res {
                    state.z[..m].copy_from_slice(&trial_u);
                    state.z[m] = trial_lambda;
                    std::mem::swap(&mut f, &mut trial_f);
                    std::mem::swap(&mut pw, &mut trial_pw);
                    res = trial_res;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        state.iteration += 1;
        if !accepted {
            // no descent possible: either at the rounding floor or stuck
            if res < cfg.tol.max(floor) * 1e3 {
                break;
            }
            return Err(Error::ConvergenceFailure {
                routine: "l_p ball projection (Newton)",
                iterations: state.iteration,
                residual: res,
            });
        }
    }
    state.kkt_residual = res;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let cfg = BallProjection::default();
        let u = project_ball(&[3.0, 4.0], 2.0, &cfg).unwrap();
        assert!((u[0] - 0.6).abs() < 1e-15 && (u[1] - 0.8).abs() < 1e-15);
        let u = project_ball(&[2.0, -0.5], f64::INFINITY, &cfg).unwrap();
        assert_eq!(u, vec![1.0, -0.5]);
    }

    #[test]
    fn symmetric_point_on_l4_sphere() {
        let u = project_ball(&[1.0, 1.0], 4.0, &BallProjection::default()).unwrap();
        let v = 2f64.powf(-0.25);
        assert!((u[0] - v).abs() < 1e-10 && (u[1] - v).abs() < 1e-10);
    }

    #[test]
    fn inside_points_are_fixed() {
        let y = [0.3, -0.2, 0.1];
        for p in [2.0, 3.0, 10.0, f64::INFINITY] {
            assert_eq!(project_ball(&y, p, &BallProjection::default()).unwrap(), y.to_vec());
        }
    }

    #[test]
    fn newton_init_example() {
        let s = newton_init(&[2.0, 0.0], 4.0);
        assert_eq!(s.u(), &[1.0, 0.0]);
        assert!((s.lambda() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn signs_restored() {
        let y = [2.0, -3.0, 0.5, -0.1];
        let u = project_ball(&y, 3.0, &BallProjection::default()).unwrap();
        for (a, b) in u.iter().zip(&y) {
            assert!(a * b >= 0.0);
        }
        assert!((lp_norm(&u, 3.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_small_moment() {
        assert!(project_ball(&[2.0], 1.5, &BallProjection::default()).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let cfg = BallProjection { tol: 1e-300, max_iter: 0 };
        let y: Vec<f64> = (0..20).map(|i| 1.0 + i as f64).collect();
        match project_ball(&y, 5.0, &cfg) {
            Err(Error::ConvergenceFailure { iterations, residual, .. }) => {
                assert_eq!(iterations, 0);
                assert!(residual > 0.0);
            }
            other => panic!("expected a convergence failure, got {other:?}"),
        }
    }
}
