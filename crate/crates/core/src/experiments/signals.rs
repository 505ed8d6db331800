//! Synthetic test signals: sparse Gaussian vectors and ellipse angiograms.

use crate::error::{invalid, Error, Result};
use crate::rng::Rng;

/// `K`-sparse vector of length `N`: support uniform without replacement,
/// non-zeros iid standard normal.
pub fn gen_sparse_signal(n: usize, k: usize, seed: u64) -> Result<Vec<f64>> {
    if k > n {
        return invalid(format!("sparsity {k} exceeds dimension {n}"));
    }
    let mut rng = Rng::new(seed);
    let support = rng.sample_indices(n, k);
    let mut x = vec![0.0; n];
    for idx in support {
        let mut v = rng.normal();
        while v == 0.0 {
            v = rng.normal();
        }
        x[idx] = v;
    }
    Ok(x)
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    theta: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }
}

/// Binary "angiogram": `n_ellipses` non-overlapping filled ellipses of value
/// `intensity` on a zero background, row-major `side × side`.
///
/// Centers are uniform, semi-axes uniform in `[3, side/6]` pixels and
/// rotations uniform; each ellipse must lie inside the frame and may not
/// share a pixel with an earlier one.
pub fn gen_angiogram(side: usize, n_ellipses: usize, intensity: f64, seed: u64) -> Result<Vec<f64>> {
    if side < 32 {
        return invalid(format!("angiogram side must be at least 32, got {side}"));
    }
    let mut rng = Rng::new(seed);
    let mut mask = vec![false; side * side];
    let max_axis = side as f64 / 6.0;
    let mut placed = 0;
    let mut attempts = 0;
    while placed < n_ellipses {
        if attempts >= MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::GenerationFailure(format!(
                "placed {placed} of {n_ellipses} ellipses in {attempts} attempts; retry with another seed"
            )));
        }
        attempts += 1;
        let a = rng.uniform_in(3.0, max_axis);
        let b = rng.uniform_in(3.0, max_axis);
        let theta = rng.uniform_in(0.0, std::f64::consts::PI);
        let reach = a.max(b);
        let cx = rng.uniform_in(reach, side as f64 - 1.0 - reach);
        let cy = rng.uniform_in(reach, side as f64 - 1.0 - reach);
        let e = Ellipse { cx, cy, a, b, theta };

        let lo_r = (cy - reach).floor().max(0.0) as usize;
        let hi_r = ((cy + reach).ceil() as usize).min(side - 1);
        let lo_c = (cx - reach).floor().max(0.0) as usize;
        let hi_c = ((cx + reach).ceil() as usize).min(side - 1);
        let mut pixels = Vec::new();
        let mut clash = false;
        'scan: for r in lo_r..=hi_r {
            for c in lo_c..=hi_c {
                if e.contains(c as f64, r as f64) {
                    if mask[r * side + c] {
                        clash = true;
                        break 'scan;
                    }
                    pixels.push(r * side + c);
                }
            }
        }
        if clash || pixels.is_empty() {
            continue;
        }
        for i in pixels {
            mask[i] = true;
        }
        placed += 1;
    }
    Ok(mask.into_iter().map(|m| if m { intensity } else { 0.0 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_signal_has_exact_support() {
        let x = gen_sparse_signal(100, 7, 3).unwrap();
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 7);
        assert_eq!(x, gen_sparse_signal(100, 7, 3).unwrap());
        assert!(gen_sparse_signal(5, 6, 1).is_err());
    }

    #[test]
    fn angiogram_is_binary() {
        let img = gen_angiogram(64, 10, 2.0, 5).unwrap();
        assert!(img.iter().all(|&v| v == 0.0 || v == 2.0));
        assert!(img.contains(&2.0));
        assert!(gen_angiogram(16, 10, 1.0, 1).is_err());
    }
}
