//! Helpers shared by the integration test targets.

/// Projection of `|y|` onto the unit `ℓ_p` sphere by nested bisection: for a
/// multiplier `λ` each coordinate solves `u + pλ u^{p-1} = |y_i|`, and `λ` is
/// chosen so that `Σ u^p = 1`.
pub fn bisection_projection(y: &[f64], p: f64) -> Vec<f64> {
    let coord = |yi: f64, lambda: f64| {
        let (mut lo, mut hi) = (0.0, yi);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid + p * lambda * mid.powf(p - 1.0) > yi {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mass = |lambda: f64| y.iter().map(|v| coord(v.abs(), lambda).powf(p)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while mass(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    y.iter().map(|v| coord(v.abs(), lambda).copysign(*v)).collect()
}
