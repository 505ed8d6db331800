//! Summary statistics for sweep aggregation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the `n - 1` denominator (NaN for `n < 2`).
pub fn std_unbiased(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// One-sided paired t-test of `mean(a - b) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub n: usize,
    pub mean_diff: f64,
    pub t: f64,
    pub p_value: f64,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return invalid("paired samples must have equal length");
    }
    if a.len() < 2 {
        return invalid("a paired test needs at least two pairs");
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let md = mean(&d);
    let sd = std_unbiased(&d);
    let (t, p_value) = if sd == 0.0 {
        // degenerate: every difference equal
        let t = if md > 0.0 {
            f64::INFINITY
        } else if md < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        (t, if md > 0.0 { 0.0 } else if md < 0.0 { 1.0 } else { 0.5 })
    } else {
        let t = md / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
        (t, dist.sf(t))
    };
    Ok(PairedTTest { n, mean_diff: md, t, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(std_unbiased(&[1.0, 2.0, 3.0]), 1.0);
        assert!(std_unbiased(&[1.0]).is_nan());
    }

    #[test]
    fn t_test_known_value() {
        // differences 1, 2, 3: t = 2 / (1 / √3) = 2√3, two degrees of freedom
        let r = paired_t_test(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        // closed form for 2 dof: sf(t) = (1 - t / √(t² + 2)) / 2
        let expect = 0.5 * (1.0 - r.t / (r.t * r.t + 2.0).sqrt());
        assert!((r.p_value - expect).abs() < 1e-10);
        let flat = paired_t_test(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(flat.p_value, 0.0);
    }
}
