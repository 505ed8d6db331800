//! Reconstruction quality metrics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::dist2;
use crate::sensing::LinearOperator;

pub const HISTOGRAM_BINS: usize = 41;
pub const HISTOGRAM_HALF_WIDTH: f64 = 1.025;
/// Value written to CSV in place of an infinite SNR.
pub const SNR_CAP_DB: f64 = 300.0;

/// `20 log10(‖x‖ / ‖x - x̂‖)`; `+∞` for an exact reconstruction.
pub fn snr_db(x: &[f64], x_hat: &[f64]) -> f64 {
    let err = dist2(x, x_hat);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if err == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (norm / err).log10()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub snr_db: f64,
    /// Fraction of measurements with `|(Φ x̂)_i - y_i| < α/2`.
    pub qc_fraction: f64,
    /// Counts of `α^{-1}(Φ x̂ - y)_i` over 41 equal bins covering
    /// `[-1.025, 1.025]`; values outside land in the end bins.
    pub residual_histogram: Vec<u64>,
    /// Normalized residuals inside `[-1/2, 1/2]`.
    pub inside_half: u64,
    pub measurements: u64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub wall_time_s: f64,
}

pub fn residual_histogram(normalized: &[f64]) -> Vec<u64> {
    let width = 2.0 * HISTOGRAM_HALF_WIDTH / HISTOGRAM_BINS as f64;
    let mut bins = vec![0u64; HISTOGRAM_BINS];
    for &r in normalized {
        let k = ((r + HISTOGRAM_HALF_WIDTH) / width).floor();
        let k = k.clamp(0.0, (HISTOGRAM_BINS - 1) as f64) as usize;
        bins[k] += 1;
    }
    bins
}

pub fn metrics(
    x: &[f64],
    x_hat: &[f64],
    op: &LinearOperator,
    y_q: &[f64],
    alpha: f64,
) -> Result<TrialReport> {
    if x.len() != x_hat.len() || x.len() != op.cols() || y_q.len() != op.rows() {
        return invalid("metrics: shapes of x, x_hat, operator and y_q disagree");
    }
    let normalized: Vec<f64> = op
        .apply(x_hat)
        .iter()
        .zip(y_q)
        .map(|(a, y)| (a - y) / alpha)
        .collect();
    let m = normalized.len();
    let consistent = normalized.iter().filter(|r| r.abs() < 0.5).count();
    let inside = normalized.iter().filter(|r| r.abs() <= 0.5).count();
    Ok(TrialReport {
        snr_db: snr_db(x, x_hat),
        qc_fraction: consistent as f64 / m as f64,
        residual_histogram: residual_histogram(&normalized),
        inside_half: inside as u64,
        measurements: m as u64,
        outer_iterations: 0,
        inner_iterations: 0,
        wall_time_s: 0.0,
    })
}
