//! Small dense vector kernels. Summation order is fixed so results are
//! reproducible bit for bit.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks_a = a.chunks_exact(8);
    let chunks_b = b.chunks_exact(8);
    let (ra, rb) = (chunks_a.remainder(), chunks_b.remainder());
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for k in 0..8 {
            acc[k] += ca[k] * cb[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `‖x‖_p` for `p ∈ [1, ∞]`, rescaled by the largest magnitude so large `p`
/// does not overflow.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return norm_inf(x);
    }
    if p == 2.0 {
        return norm2(x);
    }
    if p == 1.0 {
        return norm1(x);
    }
    let scale = norm_inf(x);
    if scale == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / scale;
    let s: f64 = x.iter().map(|v| abs_pow(v.abs() * inv, p)).sum();
    scale * s.powf(1.0 / p)
}

/// `u^e` for `u >= 0`, by repeated squaring when `e` is a small integer.
#[inline]
pub(crate) fn abs_pow(u: f64, e: f64) -> f64 {
    if (0.0..64.0).contains(&e) && e.fract() == 0.0 {
        let mut k = e as u32;
        let mut base = u;
        let mut acc = 1.0;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    } else {
        u.powf(e)
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
