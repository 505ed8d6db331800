//! Python bindings: operators, quantizer, projections, decoders and the
//! theory calculators. Vectors cross the boundary as lists of floats.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bpdq::experiments as exp;
use bpdq::sensing::{self, LinearOperator};
use bpdq::solver::{DecoderConfig, Regularizer};
use bpdq::{prox, quantize as q, theory, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Sensing operator `Φ`.
#[pyclass(name = "Operator", module = "bpdq", frozen)]
struct PyOperator {
    inner: LinearOperator,
}

#[pymethods]
impl PyOperator {
    /// Standard Gaussian `m × n` matrix.
    #[staticmethod]
    fn sgr(m: usize, n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: sensing::make_sgr(m, n, seed).map_err(to_py)? })
    }

    /// Row-major dense matrix.
    #[staticmethod]
    fn dense(m: usize, n: usize, entries: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: LinearOperator::dense(m, n, entries).map_err(to_py)? })
    }

    /// Restricted unitary DFT keeping the coefficients in `omega`.
    #[staticmethod]
    #[pyo3(signature = (dims, omega, seed=0))]
    fn partial_fourier(dims: Vec<usize>, omega: Vec<usize>, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: sensing::make_partial_fourier(&dims, &omega, seed).map_err(to_py)? })
    }

    /// Restricted DFT with `count` random coefficients.
    #[staticmethod]
    fn random_partial_fourier(dims: Vec<usize>, count: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: sensing::random_partial_fourier(&dims, count, seed).map_err(to_py)? })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.cols() {
            return Err(PyValueError::new_err(format!("expected {} values", self.inner.cols())));
        }
        Ok(self.inner.apply(&x))
    }

    fn adjoint(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        if v.len() != self.inner.rows() {
            return Err(PyValueError::new_err(format!("expected {} values", self.inner.rows())));
        }
        Ok(self.inner.adjoint(&v))
    }

    /// Real signal embedded into the operator's input space.
    fn embed_real(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.samples() {
            return Err(PyValueError::new_err(format!("expected {} values", self.inner.samples())));
        }
        Ok(self.inner.embed_real(&x))
    }

    /// `(c1, c2)` used by the dual tube iteration.
    #[pyo3(signature = (iters=100))]
    fn frame_bounds(&self, iters: usize) -> (f64, f64) {
        let b = sensing::estimate_frame_bounds(&self.inner, iters);
        (b.c1, b.c2)
    }

    /// JSON operator spec.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_spec()).map_err(json_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = serde_json::from_str(text).map_err(json_err)?;
        Ok(Self { inner: LinearOperator::from_spec(&spec).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("Operator(kind={:?}, m={}, n={})", self.inner.kind(), self.inner.rows(), self.inner.cols())
    }
}

#[pyfunction]
fn quantize(v: Vec<f64>, alpha: f64) -> PyResult<Vec<f64>> {
    let spec = q::QuantizerSpec::new(alpha).map_err(to_py)?;
    q::quantize(&v, &spec).map_err(to_py)
}

#[pyfunction]
fn zeta_p(p: f64, m: usize, alpha: f64) -> PyResult<f64> {
    q::zeta_p(p, m, alpha).map_err(to_py)
}

/// Returns `(epsilon, tail_probability)`.
#[pyfunction]
#[pyo3(signature = (p, m, alpha, kappa=2.0))]
fn epsilon_p(p: f64, m: usize, alpha: f64, kappa: f64) -> PyResult<(f64, f64)> {
    let nb = q::epsilon_p(p, m, alpha, kappa).map_err(to_py)?;
    Ok((nb.epsilon, nb.tail_prob))
}

#[pyfunction]
#[pyo3(signature = (m, alpha, kappa=2.0))]
fn epsilon_2_variance(m: usize, alpha: f64, kappa: f64) -> PyResult<f64> {
    q::epsilon_2_variance(m, alpha, kappa).map_err(to_py)
}

/// Projection onto the unit `ℓ_p` ball.
#[pyfunction]
fn project_ball(y: Vec<f64>, p: f64) -> PyResult<Vec<f64>> {
    prox::project_ball(&y, p, &prox::BallProjection::default()).map_err(to_py)
}

#[pyfunction]
fn soft_threshold(x: Vec<f64>, t: f64) -> Vec<f64> {
    prox::soft_threshold(&x, t)
}

#[pyfunction]
fn duality_map(u: Vec<f64>, p: f64) -> Vec<f64> {
    prox::duality_map(&u, p)
}

/// `argmin ‖u‖_1` (or TV) subject to `‖y - Φu‖_p <= ε`; returns a dict.
#[pyfunction]
#[pyo3(signature = (op, y, p=2.0, epsilon=0.0, gamma=1.0, outer_iters=500, regularizer="l1"))]
#[allow(clippy::too_many_arguments)]
fn decode<'py>(
    py: Python<'py>,
    op: &PyOperator,
    y: Vec<f64>,
    p: f64,
    epsilon: f64,
    gamma: f64,
    outer_iters: usize,
    regularizer: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = DecoderConfig {
        p,
        epsilon,
        gamma,
        outer_iters,
        regularizer: regularizer.parse::<Regularizer>().map_err(to_py)?,
        ..Default::default()
    };
    let res = py
        .detach(|| bpdq::solver::decode_bpdq(&op.inner, &y, &cfg))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("x_hat", res.x_hat)?;
    d.set_item("objective", res.objective)?;
    d.set_item("residual_norm_p", res.residual_norm_p)?;
    d.set_item("epsilon_used", res.epsilon_used)?;
    d.set_item("outer_iterations", res.outer_iterations_run)?;
    d.set_item("inner_iterations", res.inner_iterations_total)?;
    d.set_item("converged", res.converged)?;
    Ok(d)
}

#[pyfunction]
fn snr_db(x: Vec<f64>, x_hat: Vec<f64>) -> PyResult<f64> {
    if x.len() != x_hat.len() {
        return Err(PyValueError::new_err("length mismatch"));
    }
    Ok(exp::snr_db(&x, &x_hat))
}

#[pyfunction]
fn gen_sparse_signal(n: usize, k: usize, seed: u64) -> PyResult<Vec<f64>> {
    exp::gen_sparse_signal(n, k, seed).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (side, n_ellipses=10, intensity=1.0, seed=1))]
fn gen_angiogram(side: usize, n_ellipses: usize, intensity: f64, seed: u64) -> PyResult<Vec<f64>> {
    exp::gen_angiogram(side, n_ellipses, intensity, seed).map_err(to_py)
}

/// Runs the 1-D sweep from a JSON config; returns the result as JSON.
#[pyfunction]
fn run_experiment_1d(py: Python<'_>, config: &str) -> PyResult<String> {
    let spec: exp::ExperimentSpec = serde_json::from_str(config).map_err(json_err)?;
    let res = py.detach(|| exp::run_experiment_1d(&spec)).map_err(to_py)?;
    serde_json::to_string(&res).map_err(json_err)
}

/// Runs the angiogram experiment from a JSON config; returns JSON.
#[pyfunction]
fn run_experiment_tv(py: Python<'_>, config: &str) -> PyResult<String> {
    let spec: exp::ExperimentSpec = serde_json::from_str(config).map_err(json_err)?;
    let res = py.detach(|| exp::run_experiment_tv(&spec)).map_err(to_py)?;
    serde_json::to_string(&res).map_err(json_err)
}

#[pyfunction]
fn nu_p(p: f64) -> f64 {
    theory::nu_p(p)
}

#[pyfunction]
fn mu_p2_bounds(p: f64, m: usize) -> PyResult<(f64, f64)> {
    theory::mu_p2_bounds(p, m).map_err(to_py)
}

#[pyfunction]
fn c_p(p: f64, delta_s: f64, delta_s2: f64, delta_ss: f64) -> PyResult<f64> {
    theory::c_p(p, (delta_s, delta_s2, delta_ss)).map_err(to_py)
}

#[pyfunction]
fn theorem1_constants(delta_2k: f64) -> PyResult<(f64, f64)> {
    theory::theorem1_constants(delta_2k).map_err(to_py)
}

/// Returns `(A_p, B_p, C_p, valid)`.
#[pyfunction]
fn theorem2_constants(p: f64, k: usize, delta_k: f64, delta_2k: f64, delta_3k: f64) -> PyResult<(f64, f64, f64, bool)> {
    let prof = theory::RipProfile::assumed(k, p, delta_k, delta_2k, delta_3k).map_err(to_py)?;
    let c = theory::theorem2_constants(p, &prof).map_err(to_py)?;
    Ok((c.a_p, c.b_p, c.c_p, c.valid))
}

/// Minimal `m`, or `None` when astronomically large.
#[pyfunction]
#[pyo3(signature = (p, k, n, delta, eta, c=1.0))]
fn theta_bound(p: f64, k: usize, n: usize, delta: f64, eta: f64, c: f64) -> PyResult<Option<u64>> {
    Ok(theory::theta_bound(p, k, n, delta, eta, c).map_err(to_py)?.value())
}

/// Returns `(lhs, rhs, holds)`.
#[pyfunction]
#[pyo3(signature = (p, m, alpha, kappa=2.0))]
fn noise_error_bound_check(p: f64, m: usize, alpha: f64, kappa: f64) -> PyResult<(f64, f64, bool)> {
    let r = theory::noise_error_bound_check(p, m, alpha, kappa).map_err(to_py)?;
    Ok((r.lhs, r.rhs, r.holds))
}

#[pyfunction]
#[pyo3(signature = (op, k, p, trials, seed, mu=None))]
fn estimate_rip_radius(op: &PyOperator, k: usize, p: f64, trials: usize, seed: u64, mu: Option<f64>) -> PyResult<f64> {
    Ok(theory::estimate_rip_radius(&op.inner, k, p, trials, seed, mu).map_err(to_py)?.delta)
}

#[pyfunction]
fn compressibility_error(x: Vec<f64>, k: usize) -> PyResult<f64> {
    theory::compressibility_error(&x, k).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "bpdq")]
fn bpdq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_p, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_p, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_2_variance, m)?)?;
    m.add_function(wrap_pyfunction!(project_ball, m)?)?;
    m.add_function(wrap_pyfunction!(soft_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(duality_map, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(gen_sparse_signal, m)?)?;
    m.add_function(wrap_pyfunction!(gen_angiogram, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_1d, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_tv, m)?)?;
    m.add_function(wrap_pyfunction!(nu_p, m)?)?;
    m.add_function(wrap_pyfunction!(mu_p2_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(c_p, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_constants, m)?)?;
    m.add_function(wrap_pyfunction!(theorem2_constants, m)?)?;
    m.add_function(wrap_pyfunction!(theta_bound, m)?)?;
    m.add_function(wrap_pyfunction!(noise_error_bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rip_radius, m)?)?;
    m.add_function(wrap_pyfunction!(compressibility_error, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
