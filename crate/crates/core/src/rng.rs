//! Portable random streams.
//!
//! Every random quantity in the crate is drawn from xoshiro256++ seeded
//! through SplitMix64 (`Xoshiro256PlusPlus::seed_from_u64`). Uniforms take the
//! top 53 bits of a draw; normals use the Box–Muller transform, emitting the
//! cosine branch first and the sine branch second. Keeping the transform in
//! this file (instead of a distribution crate) pins the stream so other
//! languages can replay it.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Name recorded in operator specs and run manifests.
pub const RNG_ALGORITHM: &str = "xoshiro256++ (splitmix64 seeding), box-muller normals";

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256PlusPlus,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` by rejection (no modulo bias).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * INV_2_53;
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    /// `k` distinct indices from `0..n` by a partial Fisher–Yates shuffle,
    /// returned in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }

    /// A point drawn uniformly on the unit sphere of `R^n`.
    pub fn unit_sphere(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v = self.normals(n);
            let norm = crate::linalg::norm2(&v);
            if norm > 0.0 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent seed from a master seed and a list of indices
/// (`master ^ hash(indices)`), so cells and trials never share streams.
pub fn derive_seed(master: u64, indices: &[u64]) -> u64 {
    let h = indices
        .iter()
        .fold(0x243f_6a88_85a3_08d3u64, |acc, &i| splitmix64(acc ^ splitmix64(i)));
    master ^ h
}
