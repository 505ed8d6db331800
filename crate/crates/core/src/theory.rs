//! Calculators for the stability constants and measurement bounds, plus
//! Monte-Carlo and exhaustive probes of the restricted isometry radius.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::linalg::lp_norm;
use crate::quantize::epsilon_p;
use crate::rng::{derive_seed, Rng};
use crate::sensing::LinearOperator;

/// Constant of the noise-error bound, `9e / (8√2)` rounded up.
pub const NOISE_BOUND_CONSTANT: f64 = 2.17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipSource {
    Assumed,
    MonteCarloEstimate,
    Exhaustive,
}

/// Restricted isometry radii at orders `K`, `2K`, `3K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipProfile {
    #[serde(rename = "K")]
    pub k: usize,
    pub deltas: BTreeMap<usize, f64>,
    /// Normalization used for the estimates; absent for assumed radii.
    pub mu_p2: Option<f64>,
    #[serde(with = "crate::serde_util::moment")]
    pub p: f64,
    pub source: RipSource,
}

impl RipProfile {
    /// Profile with user-supplied radii.
    pub fn assumed(k: usize, p: f64, delta_k: f64, delta_2k: f64, delta_3k: f64) -> Result<Self> {
        let profile = RipProfile {
            k,
            deltas: [(k, delta_k), (2 * k, delta_2k), (3 * k, delta_3k)].into_iter().collect(),
            mu_p2: None,
            p,
            source: RipSource::Assumed,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return invalid("RIP profile needs K >= 1");
        }
        let mut last = 0.0;
        for order in [self.k, 2 * self.k, 3 * self.k] {
            let d = self.delta(order)?;
            if !(0.0..1.0).contains(&d) {
                return invalid(format!("delta at order {order} is {d}, expected [0, 1)"));
            }
            if d < last {
                return invalid("RIP radii must be non-decreasing in the order");
            }
            last = d;
        }
        Ok(())
    }

    pub fn delta(&self, order: usize) -> Result<f64> {
        self.deltas
            .get(&order)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("RIP profile has no radius at order {order}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityConstants {
    pub a_p: f64,
    pub b_p: f64,
    pub c_p: f64,
    pub valid: bool,
}

/// `(E|g|^p)^{1/p}` for a standard normal `g`.
pub fn nu_p(p: f64) -> f64 {
    let log_moment = 0.5 * p * 2f64.ln() - 0.5 * PI.ln() + ln_gamma((p + 1.0) / 2.0);
    (log_moment / p).exp()
}

fn check_finite_moment(p: f64) -> Result<()> {
    if p.is_infinite() {
        return Err(Error::Unsupported(
            "the normalization for p = infinity has no computable bound".into(),
        ));
    }
    if !(p >= 1.0) {
        return invalid(format!("moment must be >= 1, got {p}"));
    }
    Ok(())
}

/// Bounds `(lower, upper)` on `E‖ξ‖_p` for `ξ ~ N(0, I_m)`.
pub fn mu_p2_bounds(p: f64, m: usize) -> Result<(f64, f64)> {
    check_finite_moment(p)?;
    if m == 0 {
        return invalid("m must be >= 1");
    }
    let upper = nu_p(p) * (m as f64).powf(1.0 / p);
    let factor = (1.0 + 2f64.powf(p + 1.0) / m as f64).powf(1.0 / p - 1.0);
    Ok((upper * factor, upper))
}

/// Cross-correlation constant for disjoint supports of sizes `s`, `s'`,
/// from the radii `(δ_s, δ_s', δ_{s+s'})`.
pub fn c_p(p: f64, deltas: (f64, f64, f64)) -> Result<f64> {
    if !(p >= 2.0) || p.is_infinite() {
        return invalid(format!("C_p needs finite p >= 2, got {p}"));
    }
    let (ds, ds2, dss) = deltas;
    for d in [ds, ds2, dss] {
        if !(0.0..1.0).contains(&d) {
            return invalid(format!("RIP radius {d} outside [0, 1)"));
        }
    }
    let pb = p - 2.0;
    let first = ((ds + dss) * (ds2 + dss + pb * (1.0 + ds2))).sqrt();
    let second = ((dss + pb * (1.0 + dss) / 2.0) * (dss + pb * (2.0 + ds2 + dss) / 2.0)).sqrt();
    Ok(first.min(second))
}

/// Stability constants of the `ℓ_p` decoder with `(s, s') = (2K, K)`.
pub fn theorem2_constants(p: f64, profile: &RipProfile) -> Result<OptimalityConstants> {
    profile.validate()?;
    let k = profile.k;
    let (d_k, d_2k, d_3k) = (profile.delta(k)?, profile.delta(2 * k)?, profile.delta(3 * k)?);
    let c = c_p(p, (d_2k, d_k, d_3k))?;
    let den = 1.0 - d_2k - c;
    if den <= 0.0 {
        return Ok(OptimalityConstants {
            a_p: f64::INFINITY,
            b_p: f64::INFINITY,
            c_p: c,
            valid: false,
        });
    }
    Ok(OptimalityConstants {
        a_p: 2.0 * (1.0 + c - d_2k) / den,
        b_p: 4.0 * (1.0 + d_2k).sqrt() / den,
        c_p: c,
        valid: true,
    })
}

/// Stability constants `(A, B)` of the `ℓ_2` decoder.
pub fn theorem1_constants(delta_2k: f64) -> Result<(f64, f64)> {
    if !(delta_2k > 0.0 && delta_2k < SQRT_2 - 1.0) {
        return invalid(format!("delta_2K must lie in (0, sqrt(2) - 1), got {delta_2k}"));
    }
    let den = 1.0 - (SQRT_2 + 1.0) * delta_2k;
    let a = 2.0 * (1.0 + (SQRT_2 - 1.0) * delta_2k) / den;
    let b = 4.0 * (1.0 + delta_2k).sqrt() / den;
    Ok((a, b))
}

/// Minimal number of measurements from the measurement bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "m", rename_all = "kebab-case")]
pub enum MeasurementBound {
    Finite(u64),
    /// The bound exceeds every representable count.
    AstronomicallyLarge,
}

impl MeasurementBound {
    pub fn value(&self) -> Option<u64> {
        match self {
            MeasurementBound::Finite(m) => Some(*m),
            MeasurementBound::AstronomicallyLarge => None,
        }
    }
}

/// Right-hand side `c δ^{-2} (K log[e N/K (1 + 12/δ)] + log(2/η))`.
pub fn theta_rhs(k: usize, n: usize, delta: f64, eta: f64, c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return invalid(format!("eta must lie in (0, 1), got {eta}"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("constant c must be positive, got {c}"));
    }
    if k == 0 || k > n {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={n}"));
    }
    let (k, n) = (k as f64, n as f64);
    Ok(c / (delta * delta) * (k * (E * n / k * (1.0 + 12.0 / delta)).ln() + (2.0 / eta).ln()))
}

/// Smallest `m` with `Θ_p(m) >= RHS`, where `Θ_p(m) = m^{2/p}` for finite `p`
/// and `log m` for `p = ∞`. Finite `p` also requires `m >= (p-1) 2^{p+1}`.
pub fn theta_bound(p: f64, k: usize, n: usize, delta: f64, eta: f64, c: f64) -> Result<MeasurementBound> {
    if !(p >= 2.0) {
        return invalid(format!("moment must be >= 2, got {p}"));
    }
    let rhs = theta_rhs(k, n, delta, eta, c)?;
    // largest count representable exactly as both f64 and u64
    const LIMIT: f64 = 9.007_199_254_740_992e15;
    let (mut m, floor) = if p.is_infinite() {
        (rhs.exp(), 1.0)
    } else {
        (rhs.powf(p / 2.0), (p - 1.0) * 2f64.powf(p + 1.0))
    };
    if !(m < LIMIT) || !(floor < LIMIT) {
        return Ok(MeasurementBound::AstronomicallyLarge);
    }
    m = m.ceil().max(floor.ceil()).max(1.0);
    let theta = |m: f64| if p.is_infinite() { m.ln() } else { m.powf(2.0 / p) };
    // guard against rounding at the boundary of the inversion
    while theta(m) < rhs {
        m += 1.0;
    }
    while m > floor.ceil().max(1.0) && theta(m - 1.0) >= rhs {
        m -= 1.0;
    }
    Ok(MeasurementBound::Finite(m as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseErrorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `ε_p / μ_lower` with `2.17 α / √(p+1)`.
pub fn noise_error_bound_check(p: f64, m: usize, alpha: f64, kappa: f64) -> Result<NoiseErrorCheck> {
    if !(p >= 2.0) || p.is_infinite() {
        return invalid(format!("noise-error bound needs finite p >= 2, got {p}"));
    }
    let mf = m as f64;
    if mf < (p - 1.0) * 2f64.powf(p + 1.0) {
        return invalid(format!("need m >= (p-1) 2^(p+1) = {}, got {m}", (p - 1.0) * 2f64.powf(p + 1.0)));
    }
    let lim = ((p + 1.0) * kappa / p).powi(2);
    if !(mf > lim) {
        return invalid(format!("need m > ((p+1) kappa / p)^2 = {lim}, got {m}"));
    }
    let eps = epsilon_p(p, m, alpha, kappa)?.epsilon;
    let (lower, _) = mu_p2_bounds(p, m)?;
    let lhs = eps / lower;
    let rhs = NOISE_BOUND_CONSTANT * alpha / (p + 1.0).sqrt();
    Ok(NoiseErrorCheck { lhs, rhs, holds: lhs < rhs })
}

/// Restricted isometry radius at one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub order: usize,
    pub delta: f64,
    pub mu_p2: f64,
    pub source: RipSource,
}

fn column(op: &LinearOperator, j: usize) -> Vec<f64> {
    match op.entries() {
        Some(a) => a.iter().skip(j).step_by(op.cols()).copied().collect(),
        None => {
            let mut e = vec![0.0; op.cols()];
            e[j] = 1.0;
            op.apply(&e)
        }
    }
}

fn default_mu(op: &LinearOperator, p: f64) -> Result<f64> {
    check_finite_moment(p)?;
    Ok(nu_p(p) * (op.rows() as f64).powf(1.0 / p))
}

/// Monte-Carlo lower bound on the radius at order `k`.
///
/// Each trial (seeded `seed + trial`) draws a support and a Gaussian
/// direction; the ratio `r = ‖Φu‖_p / (μ ‖u‖_2)` is recorded for every prefix
/// of the support of length `1..=k`, so the estimate is non-decreasing in `k`
/// for a fixed seed. `mu` overrides the default normalization `ν_p m^{1/p}`.
pub fn estimate_rip_radius(
    op: &LinearOperator,
    k: usize,
    p: f64,
    trials: usize,
    seed: u64,
    mu: Option<f64>,
) -> Result<RipEstimate> {
    let n = op.cols();
    if k == 0 || k > n {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={n}"));
    }
    if trials == 0 {
        return invalid("at least one trial is needed");
    }
    if !(p >= 1.0) {
        return invalid(format!("moment must be >= 1, got {p}"));
    }
    let mu = match mu {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => return invalid(format!("normalization must be positive, got {v}")),
        None => default_mu(op, p)?,
    };
    let (mut r_min, mut r_max) = (f64::INFINITY, 0.0f64);
    for trial in 0..trials {
        // separate streams keep supports and coefficients prefix-stable in k
        let trial_seed = seed.wrapping_add(trial as u64);
        let support = Rng::new(trial_seed).sample_indices(n, k);
        let coef = Rng::new(derive_seed(trial_seed, &[1])).normals(k);
        let mut image = vec![0.0; op.rows()];
        let mut energy = 0.0;
        for (&j, &c) in support.iter().zip(&coef) {
            for (acc, a) in image.iter_mut().zip(column(op, j)) {
                *acc += c * a;
            }
            energy += c * c;
            if energy == 0.0 {
                continue;
            }
            let r = lp_norm(&image, p) / (mu * energy.sqrt());
            r_min = r_min.min(r);
            r_max = r_max.max(r);
        }
    }
    let delta = (r_max * r_max - 1.0).max(1.0 - r_min * r_min).max(0.0);
    Ok(RipEstimate {
        order: k,
        delta,
        mu_p2: mu,
        source: RipSource::MonteCarloEstimate,
    })
}

/// Monte-Carlo profile at orders `K`, `2K`, `3K` (each seeded identically).
pub fn estimate_rip_profile(
    op: &LinearOperator,
    k: usize,
    p: f64,
    trials: usize,
    seed: u64,
    mu: Option<f64>,
) -> Result<RipProfile> {
    let mut deltas = BTreeMap::new();
    let mut mu_used = None;
    for order in [k, 2 * k, 3 * k] {
        let est = estimate_rip_radius(op, order.min(op.cols()), p, trials, seed, mu)?;
        deltas.insert(order, est.delta);
        mu_used = Some(est.mu_p2);
    }
    Ok(RipProfile {
        k,
        deltas,
        mu_p2: mu_used,
        p,
        source: RipSource::MonteCarloEstimate,
    })
}

/// Largest operator size accepted by [`exact_rip_radius`].
pub const EXACT_RIP_MAX_N: usize = 16;
pub const EXACT_RIP_MAX_K: usize = 3;

/// Exact `ℓ_2` radius at order `k` by enumerating all supports and taking the
/// extreme singular values of each column submatrix.
pub fn exact_rip_radius(op: &LinearOperator, k: usize, mu: Option<f64>) -> Result<RipEstimate> {
    let n = op.cols();
    if n > EXACT_RIP_MAX_N || k > EXACT_RIP_MAX_K {
        return Err(Error::Unsupported(format!(
            "exhaustive RIP is limited to N <= {EXACT_RIP_MAX_N}, K <= {EXACT_RIP_MAX_K}"
        )));
    }
    if k == 0 || k > n {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={n}"));
    }
    let mu = match mu {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => return invalid(format!("normalization must be positive, got {v}")),
        None => default_mu(op, 2.0)?,
    };
    let m = op.rows();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| column(op, j)).collect();
    let (mut s_min, mut s_max) = (f64::INFINITY, 0.0f64);
    let mut support: Vec<usize> = (0..k).collect();
    loop {
        let sub = DMatrix::from_fn(m, k, |i, c| cols[support[c]][i] / mu);
        let sv = sub.singular_values();
        // a wide submatrix has k - m zero singular values
        let lo = if m < k { 0.0 } else { sv.min() };
        s_min = s_min.min(lo);
        s_max = s_max.max(sv.max());
        // next k-combination in lexicographic order
        let mut i = k;
        while i > 0 && support[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        support[i - 1] += 1;
        for j in i..k {
            support[j] = support[j - 1] + 1;
        }
    }
    let delta = (s_max * s_max - 1.0).max(1.0 - s_min * s_min).max(0.0);
    Ok(RipEstimate {
        order: k,
        delta,
        mu_p2: mu,
        source: RipSource::Exhaustive,
    })
}

/// `K^{-1/2} ‖x - x_K‖_1`, with `x_K` the best `K`-term approximation (ties
/// broken towards the lower index).
pub fn compressibility_error(x: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > x.len() {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={}", x.len()));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    let tail: f64 = order[k..].iter().map(|&i| x[i].abs()).sum();
    Ok(tail / (k as f64).sqrt())
}

/// Least-squares fit of `log δ̂(m)` against `-(1/p) log m + ½ log log m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub p: f64,
    pub ms: Vec<usize>,
    pub deltas: Vec<f64>,
    /// Fitted slope; the predicted rate corresponds to 1.
    pub slope: f64,
    pub intercept: f64,
}

/// Fits the decay of the Monte-Carlo radius with the number of measurements
/// on Gaussian operators of size `m × n`.
pub fn rip_scaling_fit(p: f64, n: usize, k: usize, ms: &[usize], trials: usize, seed: u64) -> Result<ScalingFit> {
    check_finite_moment(p)?;
    if ms.len() < 2 || ms.iter().any(|&m| m < 3) {
        return invalid("need at least two measurement counts, each >= 3");
    }
    let mut deltas = Vec::with_capacity(ms.len());
    for (idx, &m) in ms.iter().enumerate() {
        let op = crate::sensing::make_sgr(m, n, derive_seed(seed, &[idx as u64]))?;
        deltas.push(estimate_rip_radius(&op, k, p, trials, seed, None)?.delta);
    }
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::NumericFailure("zero radius estimate; cannot take logarithms".into()));
    }
    let xs: Vec<f64> = ms
        .iter()
        .map(|&m| {
            let lm = (m as f64).ln();
            -lm / p + 0.5 * lm.ln()
        })
        .collect();
    let ys: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let len = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / len, ys.iter().sum::<f64>() / len);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        p,
        ms: ms.to_vec(),
        deltas,
        slope,
        intercept: my - slope * mx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::make_sgr;

    #[test]
    fn nu_p_examples() {
        assert!((nu_p(2.0) - 1.0).abs() < 1e-12);
        assert!((nu_p(1.0) - (2.0 / PI).sqrt()).abs() < 1e-12);
        // E|g|^4 = 3
        assert!((nu_p(4.0) - 3f64.powf(0.25)).abs() < 1e-12);
        let c = 8.0 * SQRT_2 / (9.0 * E.sqrt());
        for i in 0..=620 {
            let p = 2.0 + i as f64 * 0.1;
            assert!(nu_p(p) >= c * ((p + 1.0) / E).sqrt(), "p = {p}");
        }
    }

    #[test]
    fn mu_bounds() {
        let (lo, hi) = mu_p2_bounds(2.0, 100).unwrap();
        assert!((hi - 10.0).abs() < 1e-12);
        assert!((lo - 10.0 / 1.08f64.sqrt()).abs() < 1e-12);
        assert!((lo - 9.6225).abs() < 1e-4);
        let (lo, hi) = mu_p2_bounds(3.0, 100_000_000).unwrap();
        assert!((lo / hi - 1.0).abs() < 1e-6);
        assert!(matches!(mu_p2_bounds(f64::INFINITY, 10), Err(Error::Unsupported(_))));
    }

    #[test]
    fn c_p_examples() {
        for t in [(0.1, 0.05, 0.2), (0.3, 0.3, 0.3), (0.0, 0.0, 0.5)] {
            assert!((c_p(2.0, t).unwrap() - t.2).abs() < 1e-15);
        }
        for p in [2.0, 5.0, 100.0] {
            assert_eq!(c_p(p, (0.0, 0.0, 0.0)).unwrap(), 0.0);
        }
        let p = 1e4;
        let ratio = c_p(p, (0.1, 0.1, 0.2)).unwrap() / ((0.1f64 + 0.2) * 1.1 * (p - 2.0)).sqrt();
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn theorem2_examples() {
        let zero = RipProfile::assumed(4, 5.0, 0.0, 0.0, 0.0).unwrap();
        let c = theorem2_constants(5.0, &zero).unwrap();
        assert!(c.valid && c.a_p == 2.0 && c.b_p == 4.0);
        let prof = RipProfile::assumed(4, 2.0, 0.1, 0.1, 0.1).unwrap();
        let c = theorem2_constants(2.0, &prof).unwrap();
        assert!((c.c_p - 0.1).abs() < 1e-15);
        assert!((c.a_p - 2.5).abs() < 1e-12);
        assert!((c.b_p - 4.0 * 1.1f64.sqrt() / 0.8).abs() < 1e-12);
        assert!((c.b_p - 5.2440).abs() < 1e-4);
        let bad = RipProfile::assumed(4, 2.0, 0.3, 0.5, 0.6).unwrap();
        assert!(!theorem2_constants(2.0, &bad).unwrap().valid);
    }

    #[test]
    fn theorem1_examples() {
        let (a, b) = theorem1_constants(0.2).unwrap();
        assert!(a > 4.18 && a < 4.2 && b > 8.46 && b < 8.5, "{a} {b}");
        let (a, b) = theorem1_constants(1e-12).unwrap();
        assert!((a - 2.0).abs() < 1e-10 && (b - 4.0).abs() < 1e-10);
        assert!(theorem1_constants(0.5).is_err());
        assert!(theorem1_constants(0.0).is_err());
    }

    #[test]
    fn theta_examples() {
        let m2 = theta_bound(2.0, 16, 1024, 0.5, 0.5, 1.0).unwrap().value().unwrap();
        let expect = (4.0 * (16.0 * (64.0 * E * 25.0f64).ln() + 4f64.ln())).ceil() as u64;
        assert_eq!(m2, expect);
        let m4 = theta_bound(4.0, 16, 1024, 0.5, 0.5, 1.0).unwrap().value().unwrap();
        assert!(m4 >= m2);
        assert_eq!(theta_bound(f64::INFINITY, 16, 1024, 0.5, 0.5, 1.0).unwrap(), MeasurementBound::AstronomicallyLarge);
        let small = theta_bound(f64::INFINITY, 1, 2, 0.99, 0.99, 0.01).unwrap().value().unwrap();
        let rhs = theta_rhs(1, 2, 0.99, 0.99, 0.01).unwrap();
        assert_eq!(small, rhs.exp().ceil() as u64);
        // the structural floor (p-1) 2^(p+1) applies
        let m10 = theta_bound(10.0, 1, 2, 0.99, 0.99, 0.01).unwrap().value().unwrap();
        assert_eq!(m10, 9 * 2048);
    }

    #[test]
    fn noise_bound_examples() {
        assert!(noise_error_bound_check(2.0, 100, 1.0, 2.0).unwrap().holds);
        assert!(noise_error_bound_check(3.0, 64, 1.0, 2.0).unwrap().holds);
        let a = noise_error_bound_check(3.0, 64, 1.0, 2.0).unwrap();
        let b = noise_error_bound_check(3.0, 64, 7.5, 2.0).unwrap();
        assert_eq!(a.holds, b.holds);
        assert!(noise_error_bound_check(4.0, 64, 1.0, 2.0).is_err());
    }

    #[test]
    fn rip_identity_and_monotone() {
        let n = 10;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 3.0;
        }
        let op = LinearOperator::dense(n, n, entries).unwrap();
        let est = estimate_rip_radius(&op, 3, 2.0, 50, 1, Some(3.0)).unwrap();
        assert!(est.delta < 1e-12);

        let op = make_sgr(30, 40, 2).unwrap();
        let mut last = 0.0;
        for k in 1..=8 {
            let d = estimate_rip_radius(&op, k, 3.0, 40, 9, None).unwrap().delta;
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn exhaustive_bounds_monte_carlo() {
        let op = make_sgr(12, 12, 5).unwrap();
        let exact = exact_rip_radius(&op, 2, None).unwrap();
        let mc = estimate_rip_radius(&op, 2, 2.0, 2000, 3, None).unwrap();
        assert!(exact.delta >= mc.delta - 1e-12, "{} {}", exact.delta, mc.delta);
        assert!(exact_rip_radius(&make_sgr(4, 20, 1).unwrap(), 2, None).is_err());
    }

    #[test]
    fn compressibility_examples() {
        assert_eq!(compressibility_error(&[0.0, 2.0, 0.0, -1.0], 2).unwrap(), 0.0);
        assert_eq!(compressibility_error(&[3.0, 2.0, 1.0], 1).unwrap(), 3.0);
        assert!((compressibility_error(&[3.0, 2.0, 1.0], 2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        // ties keep the lower index
        assert_eq!(compressibility_error(&[1.0, -1.0, 1.0], 1).unwrap(), 2.0);
    }
}
