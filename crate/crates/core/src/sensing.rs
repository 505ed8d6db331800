//! Sensing operators: dense Gaussian matrices and restricted Fourier frames.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{axpy, dot, norm2};
use crate::rng::{Rng, RNG_ALGORITHM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    /// iid N(0, 1) entries drawn from the seeded stream.
    DenseGaussian,
    /// Caller-supplied dense matrix.
    Dense,
    /// Rows of the unitary DFT indexed by Ω, real parts then imaginary parts.
    RestrictedFourier,
}

/// Spectral bounds `c1 Id <= Φ Φ^T <= c2 Id`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub c1: f64,
    pub c2: f64,
}

impl FrameBounds {
    pub fn is_tight(&self) -> bool {
        self.c1 > 0.0 && self.c1 == self.c2
    }
}

/// Serializable description from which an operator can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    /// Transform shape for the Fourier operator: `[N]` or `[rows, cols]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    /// Retained DFT coefficients (0-based, row-major flattening in 2-D).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<usize>>,
    /// Row-major entries for `kind = dense`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<f64>>,
    #[serde(default = "default_rng_name")]
    pub rng: String,
}

fn default_rng_name() -> String {
    RNG_ALGORITHM.to_string()
}

#[derive(Clone)]
struct FourierPlan {
    dims: Vec<usize>,
    omega: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    scale: f64,
}

#[derive(Clone)]
enum Repr {
    Dense(Vec<f64>),
    Fourier(FourierPlan),
}

/// A linear map `Φ: R^n -> R^m` with its adjoint.
///
/// The restricted Fourier operator acts on complex signals stored as the real
/// block followed by the imaginary block, so its input dimension is twice the
/// number of samples. On that space `Φ Φ^T = Id` holds exactly; a real image
/// is embedded with a zero imaginary block.
#[derive(Clone)]
pub struct LinearOperator {
    kind: OperatorKind,
    m: usize,
    n: usize,
    seed: u64,
    repr: Repr,
    gram: OnceLock<Option<Vec<f64>>>,
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperator")
            .field("kind", &self.kind)
            .field("m", &self.m)
            .field("n", &self.n)
            .field("seed", &self.seed)
            .finish()
    }
}

/// Standard Gaussian random matrix, filled row by row from the seeded stream.
pub fn make_sgr(m: usize, n: usize, seed: u64) -> Result<LinearOperator> {
    if m == 0 || n == 0 {
        return invalid(format!("SGR dimensions must be positive, got {m}x{n}"));
    }
    let mut rng = Rng::new(seed);
    let data = rng.normals(m * n);
    Ok(LinearOperator {
        kind: OperatorKind::DenseGaussian,
        m,
        n,
        seed,
        repr: Repr::Dense(data),
        gram: OnceLock::new(),
    })
}

/// Restricted unitary DFT over a 1-D (`dims = [N]`) or 2-D (`dims = [rows, cols]`)
/// grid. Produces `m = 2|Ω|` measurements.
pub fn make_partial_fourier(dims: &[usize], omega: &[usize], seed: u64) -> Result<LinearOperator> {
    if dims.is_empty() || dims.len() > 2 || dims.contains(&0) {
        return invalid(format!("Fourier grid must be 1-D or 2-D with positive sides, got {dims:?}"));
    }
    let total: usize = dims.iter().product();
    if omega.is_empty() {
        return invalid("Ω must contain at least one index");
    }
    let mut sorted = omega.to_vec();
    sorted.sort_unstable();
    if let Some(&bad) = sorted.iter().find(|&&i| i >= total) {
        return invalid(format!("Ω index {bad} out of range 0..{total}"));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return invalid("Ω contains duplicate indices");
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = dims.iter().map(|&d| planner.plan_fft_forward(d)).collect();
    let inverse = dims.iter().map(|&d| planner.plan_fft_inverse(d)).collect();
    Ok(LinearOperator {
        kind: OperatorKind::RestrictedFourier,
        m: 2 * sorted.len(),
        n: 2 * total,
        seed,
        repr: Repr::Fourier(FourierPlan {
            dims: dims.to_vec(),
            omega: sorted,
            forward,
            inverse,
            scale: 1.0 / (total as f64).sqrt(),
        }),
        gram: OnceLock::new(),
    })
}

/// Restricted Fourier operator with `count` frequencies drawn uniformly
/// without replacement from the seeded stream.
pub fn random_partial_fourier(dims: &[usize], count: usize, seed: u64) -> Result<LinearOperator> {
    let total: usize = dims.iter().product();
    if count == 0 || count > total {
        return invalid(format!("cannot draw {count} frequencies out of {total}"));
    }
    let mut rng = Rng::new(seed);
    let omega = rng.sample_indices(total, count);
    make_partial_fourier(dims, &omega, seed)
}

impl LinearOperator {
    /// Wraps a caller-supplied row-major matrix.
    pub fn dense(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return invalid(format!("dense dimensions must be positive, got {m}x{n}"));
        }
        if entries.len() != m * n {
            return invalid(format!("expected {} entries, got {}", m * n, entries.len()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(Self {
            kind: OperatorKind::Dense,
            m,
            n,
            seed: 0,
            repr: Repr::Dense(entries),
            gram: OnceLock::new(),
        })
    }

    pub fn from_spec(spec: &OperatorSpec) -> Result<Self> {
        let op = match spec.kind {
            OperatorKind::DenseGaussian => make_sgr(spec.m, spec.n, spec.seed)?,
            OperatorKind::Dense => match &spec.entries {
                Some(e) => Self::dense(spec.m, spec.n, e.clone())?,
                None => return invalid("dense operator spec needs `entries`"),
            },
            OperatorKind::RestrictedFourier => {
                let dims = spec.dims.clone().unwrap_or_else(|| vec![spec.n]);
                match &spec.omega {
                    Some(omega) => make_partial_fourier(&dims, omega, spec.seed)?,
                    None => {
                        if !spec.m.is_multiple_of(2) {
                            return invalid("restricted Fourier m must be even");
                        }
                        random_partial_fourier(&dims, spec.m / 2, spec.seed)?
                    }
                }
            }
        };
        if op.kind == OperatorKind::RestrictedFourier && (op.m != spec.m || op.samples() != spec.n) {
            return invalid("operator spec dimensions disagree with Ω / dims");
        }
        Ok(op)
    }

    pub fn to_spec(&self) -> OperatorSpec {
        let (dims, omega, entries) = match &self.repr {
            Repr::Fourier(f) => (Some(f.dims.clone()), Some(f.omega.clone()), None),
            Repr::Dense(d) if self.kind == OperatorKind::Dense => (None, None, Some(d.clone())),
            Repr::Dense(_) => (None, None, None),
        };
        OperatorSpec {
            kind: self.kind,
            m: self.m,
            n: self.samples(),
            seed: self.seed,
            dims,
            omega,
            entries,
            rng: RNG_ALGORITHM.to_string(),
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of measurements.
    pub fn rows(&self) -> usize {
        self.m
    }

    /// Dimension of the signal space the operator acts on.
    pub fn cols(&self) -> usize {
        self.n
    }

    /// Number of signal samples (`cols / 2` for the complex Fourier operator).
    pub fn samples(&self) -> usize {
        match self.repr {
            Repr::Fourier(_) => self.n / 2,
            Repr::Dense(_) => self.n,
        }
    }

    pub fn omega(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Fourier(f) => Some(&f.omega),
            Repr::Dense(_) => None,
        }
    }

    pub fn dims(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Fourier(f) => Some(&f.dims),
            Repr::Dense(_) => None,
        }
    }

    /// Row-major entries of a dense operator.
    pub fn entries(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Dense(d) => Some(d),
            Repr::Fourier(_) => None,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "apply: signal has wrong length");
        match &self.repr {
            Repr::Dense(a) => a.chunks_exact(self.n).map(|row| dot(row, x)).collect(),
            Repr::Fourier(f) => f.apply(x),
        }
    }

    pub fn adjoint(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.m, "adjoint: measurement vector has wrong length");
        match &self.repr {
            Repr::Dense(a) => {
                let mut out = vec![0.0; self.n];
                for (row, &vi) in a.chunks_exact(self.n).zip(v) {
                    if vi != 0.0 {
                        axpy(vi, row, &mut out);
                    }
                }
                out
            }
            Repr::Fourier(f) => f.adjoint(v),
        }
    }

    /// `Φ Φ^T v`. Dense operators with `m < 2n` use a cached Gram matrix
    /// (upper triangle, packed by rows), which is cheaper than the pair of
    /// products and half the memory of the full square.
    pub fn normal_apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.m, "normal_apply: length mismatch");
        let Some(g) = self.packed_gram() else {
            return self.apply(&self.adjoint(v));
        };
        let m = self.m;
        let mut out = vec![0.0; m];
        let mut start = 0;
        for i in 0..m {
            let row = &g[start..start + m - i];
            out[i] += dot(row, &v[i..]);
            axpy(v[i], &row[1..], &mut out[i + 1..]);
            start += m - i;
        }
        out
    }

    fn packed_gram(&self) -> Option<&[f64]> {
        self.gram
            .get_or_init(|| match &self.repr {
                Repr::Dense(a) if self.m < 2 * self.n => {
                    let (m, n) = (self.m, self.n);
                    let mut g = Vec::with_capacity(m * (m + 1) / 2);
                    for i in 0..m {
                        let ri = &a[i * n..(i + 1) * n];
                        for j in i..m {
                            g.push(dot(ri, &a[j * n..(j + 1) * n]));
                        }
                    }
                    Some(g)
                }
                _ => None,
            })
            .as_deref()
    }

    /// Embeds a real signal into the operator's input space (zero imaginary
    /// block for the Fourier operator).
    pub fn embed_real(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.samples());
        let mut out = x.to_vec();
        out.resize(self.n, 0.0);
        out
    }
}

impl FourierPlan {
    fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        match self.dims.as_slice() {
            [_] => plans[0].process(buf),
            [rows, cols] => {
                // rows are contiguous; columns go through a transpose
                plans[1].process(buf);
                let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
                for r in 0..*rows {
                    for c in 0..*cols {
                        t[c * rows + r] = buf[r * cols + c];
                    }
                }
                plans[0].process(&mut t);
                for r in 0..*rows {
                    for c in 0..*cols {
                        buf[r * cols + c] = t[c * rows + r];
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let total = self.total();
        let mut buf: Vec<Complex64> = (0..total).map(|i| Complex64::new(x[i], x[total + i])).collect();
        self.transform(&mut buf, &self.forward);
        let k = self.omega.len();
        let mut out = vec![0.0; 2 * k];
        for (j, &idx) in self.omega.iter().enumerate() {
            out[j] = buf[idx].re * self.scale;
            out[k + j] = buf[idx].im * self.scale;
        }
        out
    }

    fn adjoint(&self, v: &[f64]) -> Vec<f64> {
        let total = self.total();
        let k = self.omega.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); total];
        for (j, &idx) in self.omega.iter().enumerate() {
            buf[idx] = Complex64::new(v[j], v[k + j]);
        }
        self.transform(&mut buf, &self.inverse);
        let mut out = vec![0.0; 2 * total];
        for (i, c) in buf.iter().enumerate() {
            out[i] = c.re * self.scale;
            out[total + i] = c.im * self.scale;
        }
        out
    }
}

/// Frame bounds for the dual forward–backward iteration.
///
/// The Fourier operator is exactly tight (`c1 = c2 = 1`). For dense operators
/// `c2` is the power-iteration estimate of `‖Φ‖²` inflated by 1%, and `c1 = 0`.
pub fn estimate_frame_bounds(op: &LinearOperator, iters: usize) -> FrameBounds {
    if op.kind == OperatorKind::RestrictedFourier {
        return FrameBounds { c1: 1.0, c2: 1.0 };
    }
    let mut rng = Rng::new(0x5eed_f00d);
    let mut v: Vec<f64> = rng.normals(op.rows());
    let n0 = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut lambda = 0.0;
    for _ in 0..iters.max(1) {
        let w = op.normal_apply(&v);
        let nw = norm2(&w);
        if nw == 0.0 {
            break;
        }
        lambda = dot(&v, &w);
        v = w.into_iter().map(|x| x / nw).collect();
    }
    FrameBounds { c1: 0.0, c2: lambda.max(0.0) * 1.01 }
}
