//! Python bindings. Vectors cross the boundary as lists of floats and
//! matrices as lists of rows.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use streamista::harness::config::ExperimentConfig;
use streamista::harness::{experiment, fit};
use streamista::{measurement, signal, solver, theory};

fn err(e: streamista::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(x: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(x)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[pyclass(name = "MeasurementMatrix", module = "streamista", from_py_object)]
#[derive(Clone)]
pub struct PyMatrix {
    inner: measurement::MeasurementMatrix,
}

#[pymethods]
impl PyMatrix {
    /// Builds a matrix from rows, rescaling columns to unit norm.
    #[new]
    #[pyo3(signature = (rows, seed = 0))]
    fn new(rows: Vec<Vec<f64>>, seed: u64) -> PyResult<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("ragged rows"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let inner = measurement::MeasurementMatrix::from_columns_normalized(DMatrix::from_row_slice(m, n, &flat), seed).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        rows(self.inner.entries())
    }

    /// Exact restricted isometry constant at level `s` and the support attaining it.
    #[pyo3(signature = (s, budget = measurement::DEFAULT_RIP_BUDGET))]
    fn rip_exact(&self, s: usize, budget: u128) -> PyResult<(f64, Vec<usize>)> {
        let r = measurement::rip_exact(&self.inner, s, budget).map_err(err)?;
        Ok((r.delta, r.worst_support))
    }

    /// Monte-Carlo lower estimate of the constant at level `s`.
    fn rip_monte_carlo(&self, s: usize, trials: u64, seed: u64) -> PyResult<(f64, Vec<usize>)> {
        let r = measurement::rip_monte_carlo(&self.inner, s, trials, seed).map_err(err)?;
        Ok((r.delta, r.worst_support))
    }

    #[pyo3(signature = (target, noise = None))]
    fn measure(&self, target: Vec<f64>, noise: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
        let noise = noise.map_or_else(|| DVector::zeros(self.inner.rows()), vector);
        Ok(measurement::measure(&self.inner, &vector(target), &noise).map_err(err)?.as_slice().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("MeasurementMatrix({}x{}, seed={})", self.inner.rows(), self.inner.cols(), self.inner.seed())
    }
}

#[pyfunction]
fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> PyResult<PyMatrix> {
    Ok(PyMatrix { inner: measurement::gen_gaussian_matrix(m, n, seed).map_err(err)? })
}

#[pyfunction]
fn gen_identity(n: usize) -> PyResult<PyMatrix> {
    Ok(PyMatrix { inner: measurement::gen_identity(n).map_err(err)? })
}

#[pyclass(name = "DynamicTarget", module = "streamista", from_py_object)]
#[derive(Clone)]
pub struct PyTarget {
    inner: signal::DynamicTarget,
}

#[pymethods]
impl PyTarget {
    #[new]
    #[pyo3(signature = (samples, beta = 1.0, mu = 0.0))]
    fn new(samples: Vec<Vec<f64>>, beta: f64, mu: f64) -> Self {
        Self { inner: signal::DynamicTarget::from_samples(samples.into_iter().map(vector).collect(), beta, mu) }
    }

    #[getter]
    fn samples(&self) -> Vec<Vec<f64>> {
        self.inner.samples.iter().map(|v| v.as_slice().to_vec()).collect()
    }

    #[getter]
    fn support(&self) -> Vec<Vec<usize>> {
        self.inner.support.clone()
    }

    fn zero_hold(&self, p: usize) -> PyResult<Self> {
        Ok(Self { inner: signal::zero_hold(&self.inner, p).map_err(err)? })
    }

    fn estimate_beta(&self) -> f64 {
        signal::estimate_beta(&self.inner)
    }

    fn estimate_mu_dl(&self) -> PyResult<f64> {
        signal::estimate_mu_dl(&self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
#[pyo3(signature = (n = 128, s = 8, n_pairs = 2, length = 40, beta = 1.0, mu = 0.8, seed = 0))]
fn assemble_target(n: usize, s: usize, n_pairs: usize, length: usize, beta: f64, mu: f64, seed: u64) -> PyResult<PyTarget> {
    let cfg = signal::GenConfig { n, s, n_pairs, len: length, beta, mu, seed };
    Ok(PyTarget { inner: signal::assemble_target(&cfg).map_err(err)? })
}

#[pyclass(name = "SolverTrace", module = "streamista", skip_from_py_object)]
pub struct PyTrace {
    inner: solver::SolverTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn errors(&self) -> Vec<f64> {
        self.inner.errors()
    }

    #[getter]
    fn pre_measurement_errors(&self) -> Vec<f64> {
        self.inner.pre_measurement_errors()
    }

    #[getter]
    fn gamma_sizes(&self) -> Vec<usize> {
        self.inner.records.iter().map(|r| r.gamma_size).collect()
    }

    #[getter]
    fn initial_error(&self) -> f64 {
        self.inner.initial_error
    }

    #[getter]
    fn final_output(&self) -> Vec<f64> {
        self.inner.final_state.a.as_slice().to_vec()
    }

    fn max_support(&self) -> usize {
        self.inner.max_support()
    }
}

fn init_or_zero(init_u: Option<Vec<f64>>, n: usize) -> DVector<f64> {
    init_u.map_or_else(|| DVector::zeros(n), vector)
}

#[pyfunction]
#[pyo3(signature = (phi, measurements, target, lam, eta = 1.0, p = 1, dl = 1.0, init_u = None))]
#[allow(clippy::too_many_arguments)]
fn run_streaming(
    phi: &PyMatrix,
    measurements: Vec<Vec<f64>>,
    target: &PyTarget,
    lam: f64,
    eta: f64,
    p: usize,
    dl: f64,
    init_u: Option<Vec<f64>>,
) -> PyResult<PyTrace> {
    let ys: Vec<_> = measurements.into_iter().map(vector).collect();
    let config = solver::SolverConfig { lambda: lam, eta, p, dl, tau: dl };
    let init = init_or_zero(init_u, phi.inner.cols());
    Ok(PyTrace { inner: solver::run_streaming(&phi.inner, &ys, &target.inner, &config, &init).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (phi, measurements, target, lam, tau, init_u = None))]
fn lca_simulate(phi: &PyMatrix, measurements: Vec<Vec<f64>>, target: &PyTarget, lam: f64, tau: f64, init_u: Option<Vec<f64>>) -> PyResult<PyTrace> {
    let ys: Vec<_> = measurements.into_iter().map(vector).collect();
    let init = init_or_zero(init_u, phi.inner.cols());
    Ok(PyTrace { inner: solver::lca_simulate(&phi.inner, &ys, &target.inner, lam, tau, &init).map_err(err)? })
}

#[pyfunction]
fn soft_threshold(u: Vec<f64>, lam: f64) -> Vec<f64> {
    solver::soft_threshold(&vector(u), lam).as_slice().to_vec()
}

#[pyclass(name = "IstaBound", module = "streamista", skip_from_py_object)]
pub struct PyIstaBound {
    inner: theory::IstaBoundParams,
}

#[pymethods]
impl PyIstaBound {
    #[new]
    #[pyo3(signature = (delta, eta, sigma, lam, q, mu, dl, p, beta, e1))]
    #[allow(clippy::too_many_arguments)]
    fn new(delta: f64, eta: f64, sigma: f64, lam: f64, q: usize, mu: f64, dl: f64, p: usize, beta: f64, e1: f64) -> PyResult<Self> {
        let problem = theory::IstaProblem { delta, eta, sigma, lambda: lam, q, mu, dl, p, beta };
        Ok(Self { inner: theory::IstaBoundParams::new(problem, e1).map_err(err)? })
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn v(&self) -> f64 {
        self.inner.v
    }

    #[getter]
    fn w(&self) -> f64 {
        self.inner.w
    }

    fn bound(&self, l: usize) -> f64 {
        theory::ista_error_bound(l, &self.inner)
    }

    fn steady_state(&self) -> f64 {
        theory::ista_steady_state(&self.inner)
    }
}

#[pyclass(name = "LcaBound", module = "streamista", skip_from_py_object)]
pub struct PyLcaBound {
    inner: theory::LcaBoundParams,
}

#[pymethods]
impl PyLcaBound {
    #[new]
    #[allow(clippy::too_many_arguments)]
    fn new(delta: f64, tau: f64, mu: f64, sigma: f64, lam: f64, q: usize, beta: f64, e0: f64) -> PyResult<Self> {
        Ok(Self { inner: theory::LcaBoundParams::new(delta, tau, mu, sigma, lam, q, beta, e0).map_err(err)? })
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }

    fn bound(&self, t: f64) -> f64 {
        theory::lca_error_bound(t, &self.inner)
    }
}

/// Fits `c^P / (1 - c^P) * mu * dl + V`; returns `(c_hat, V_hat, sse, r2)`.
#[pyfunction]
fn fit_steady_state(p_values: Vec<usize>, steady: Vec<f64>, mu: f64, dl: f64) -> PyResult<(f64, f64, f64, f64)> {
    let f = fit::fit_steady_state(&p_values, &steady, mu, dl).map_err(err)?;
    Ok((f.c_hat, f.v_hat, f.sse, f.r2))
}

/// Runs the trials described by a config text; returns `(mean, std)` pre-measurement error curves.
#[pyfunction]
fn run_trials(config: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = ExperimentConfig::parse(config).map_err(err)?;
    let set = experiment::run_trials(&cfg).map_err(err)?;
    Ok((set.mean, set.std))
}

#[pymodule]
#[pyo3(name = "streamista")]
fn streamista_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyTarget>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyIstaBound>()?;
    m.add_class::<PyLcaBound>()?;
    m.add_function(wrap_pyfunction!(gen_gaussian_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(gen_identity, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_target, m)?)?;
    m.add_function(wrap_pyfunction!(run_streaming, m)?)?;
    m.add_function(wrap_pyfunction!(lca_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(soft_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(fit_steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    Ok(())
}
