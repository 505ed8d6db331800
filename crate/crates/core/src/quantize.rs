//! Uniform midpoint quantization and estimators of the quantization-noise
//! norms used as decoder fidelity radii.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default tail parameter; the tube then contains the noise with probability
/// above `1 - e^{-8}`.
pub const DEFAULT_KAPPA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec {
    alpha: f64,
}

impl QuantizerSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid(format!("bin width must be positive and finite, got {alpha}"));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quantize(&self, v: &[f64]) -> Result<Vec<f64>> {
        quantize(v, self)
    }
}

/// `Q_α(v)_i = α ⌊v_i / α⌋ + α/2`. Values on a bin edge go to the bin above.
pub fn quantize(v: &[f64], spec: &QuantizerSpec) -> Result<Vec<f64>> {
    let a = spec.alpha;
    v.iter()
        .map(|&x| {
            if x.is_finite() {
                Ok(a * (x / a).floor() + 0.5 * a)
            } else {
                invalid(format!("cannot quantize non-finite value {x}"))
            }
        })
        .collect()
}

/// Fidelity radius together with the quantities it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBound {
    #[serde(with = "crate::serde_util::moment")]
    pub p: f64,
    pub m: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub epsilon: f64,
    /// `E‖ξ‖_p^p`; absent for `p = ∞`.
    pub zeta_p: Option<f64>,
    /// Upper bound on `P[‖ξ‖_p > ε]`.
    pub tail_prob: f64,
}

fn check_common(m: usize, alpha: f64) -> Result<()> {
    if m == 0 {
        return invalid("measurement count must be positive");
    }
    QuantizerSpec::new(alpha).map(|_| ())
}

/// `E‖ξ‖_p^p = α^p m / (2^p (p + 1))` for `ξ` uniform on `[-α/2, α/2]^m`.
pub fn zeta_p(p: f64, m: usize, alpha: f64) -> Result<f64> {
    check_common(m, alpha)?;
    if p.is_infinite() {
        return Err(Error::Unsupported("ζ_p is undefined for p = ∞; use epsilon_p".into()));
    }
    if !(p >= 1.0) {
        return invalid(format!("moment must satisfy p >= 1, got {p}"));
    }
    Ok((alpha / 2.0).powf(p) * m as f64 / (p + 1.0))
}

/// Hoeffding-type radius
/// `ε_p = α / (2 (p+1)^{1/p}) · (m + κ (p+1) √m)^{1/p}`, and `α/2` at `p = ∞`.
pub fn epsilon_p(p: f64, m: usize, alpha: f64, kappa: f64) -> Result<NoiseBound> {
    check_common(m, alpha)?;
    if !(p >= 2.0) {
        return invalid(format!("fidelity moment must satisfy p >= 2, got {p}"));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return invalid(format!("kappa must be a finite non-negative number, got {kappa}"));
    }
    if p.is_infinite() {
        return Ok(NoiseBound {
            p,
            m,
            alpha,
            kappa,
            epsilon: alpha / 2.0,
            zeta_p: None,
            tail_prob: 0.0,
        });
    }
    let mf = m as f64;
    let inner = mf + kappa * (p + 1.0) * mf.sqrt();
    let epsilon = alpha / (2.0 * (p + 1.0).powf(1.0 / p)) * inner.powf(1.0 / p);
    Ok(NoiseBound {
        p,
        m,
        alpha,
        kappa,
        epsilon,
        zeta_p: Some(zeta_p(p, m, alpha)?),
        tail_prob: (-2.0 * kappa * kappa).exp(),
    })
}

/// Mean-plus-κ-standard-deviations radius for the `ℓ2` tube:
/// `sqrt(α² m / 12 + κ α² √m / (6 √5))`.
pub fn epsilon_2_variance(m: usize, alpha: f64, kappa: f64) -> Result<f64> {
    check_common(m, alpha)?;
    let mf = m as f64;
    let a2 = alpha * alpha;
    Ok((a2 * mf / 12.0 + kappa * a2 * mf.sqrt() / (6.0 * 5f64.sqrt())).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantizer_examples() {
        let q = QuantizerSpec::new(1.0).unwrap();
        assert_eq!(q.quantize(&[0.3]).unwrap(), vec![0.5]);
        assert_eq!(q.quantize(&[-0.2]).unwrap(), vec![-0.5]);
        assert_eq!(q.quantize(&[1.0]).unwrap(), vec![1.5]);
    }

    #[test]
    fn quantizer_rejects_bad_input() {
        assert!(QuantizerSpec::new(0.0).is_err());
        assert!(QuantizerSpec::new(-1.0).is_err());
        let q = QuantizerSpec::new(1.0).unwrap();
        assert!(q.quantize(&[f64::NAN]).is_err());
        assert!(q.quantize(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn zeta_examples() {
        assert!((zeta_p(1.0, 12, 2.0).unwrap() - 6.0).abs() < 1e-12);
        assert!((zeta_p(2.0, 3, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(zeta_p(f64::INFINITY, 3, 1.0), Err(Error::Unsupported(_))));
        assert!(zeta_p(2.0, 0, 1.0).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let b = epsilon_p(2.0, 100, 1.0, 2.0).unwrap();
        // (1 / (2 sqrt 3)) * sqrt(160)
        assert!((b.epsilon - 160f64.sqrt() / (2.0 * 3f64.sqrt())).abs() < 1e-12);
        assert!((b.epsilon - 3.6515).abs() < 1e-4);
        assert!((b.tail_prob - (-8f64).exp()).abs() < 1e-15);
        assert_eq!(epsilon_p(f64::INFINITY, 7, 0.5, 2.0).unwrap().epsilon, 0.25);
        let b0 = epsilon_p(2.0, 12, 1.0, 0.0).unwrap();
        assert!((b0.epsilon - 1.0).abs() < 1e-12);
        assert!((b0.epsilon - zeta_p(2.0, 12, 1.0).unwrap().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn epsilon_tends_to_half_bin() {
        let e = epsilon_p(200.0, 100, 1.0, 2.0).unwrap().epsilon;
        assert!((e - 0.5).abs() <= 0.05);
    }

    #[test]
    fn variance_radius() {
        assert!((epsilon_2_variance(12, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let e = epsilon_2_variance(100, 1.0, 2.0).unwrap();
        let expected = (100.0 / 12.0 + 20.0 / (6.0 * 5f64.sqrt())).sqrt();
        assert!((e - expected).abs() < 1e-12);
        assert!((e - 3.1344).abs() < 1e-4);
        let e2 = epsilon_2_variance(100, 2.0, 2.0).unwrap();
        assert!((e2 - 2.0 * e).abs() < 1e-12);
    }
}
