//! Python bindings. Matrices cross the boundary as nested lists of Python
//! `complex` in row-major order; reports come back as JSON strings.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use distill_lab::edgestate::{self, EdgeParams};
use distill_lab::harness::{self, SuiteName};
use distill_lab::multicopy;
use distill_lab::qcore::{self, matrix_from_rows};
use distill_lab::witness::{self, Certification, WitnessCertificate};
use distill_lab::{BipartiteDims, BipartiteState, CMatrix, DistillError, ToleranceConfig};

type Rows = Vec<Vec<Complex64>>;

fn py_err(e: DistillError) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_matrix(rows: &Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    let flat: Vec<Complex64> = rows.iter().flatten().copied().collect();
    matrix_from_rows(n, cols, &flat).map_err(py_err)
}

fn to_rows(m: &CMatrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn config(restarts: Option<usize>, seed: Option<u64>) -> PyResult<ToleranceConfig> {
    let mut cfg = ToleranceConfig::default();
    if let Some(r) = restarts {
        cfg = cfg.with_restarts(r);
    }
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

fn state(
    rows: &Rows,
    dim_a: usize,
    dim_b: usize,
    cfg: &ToleranceConfig,
) -> PyResult<BipartiteState> {
    let dims = BipartiteDims::new(dim_a, dim_b).map_err(py_err)?;
    BipartiteState::new(to_matrix(rows)?, dims, cfg).map_err(py_err)
}

/// A Schmidt-rank-two witness.
#[pyclass(name = "Certificate", frozen)]
struct PyCertificate {
    inner: WitnessCertificate,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn route(&self) -> String {
        self.inner.route.to_string()
    }

    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn copies(&self) -> usize {
        self.inner.copies
    }

    #[getter]
    fn schmidt_rank(&self) -> usize {
        self.inner.schmidt_rank
    }

    #[getter]
    fn dims(&self) -> (usize, usize) {
        let d = self.inner.psi.dims();
        (d.dim_a, d.dim_b)
    }

    #[getter]
    fn psi(&self) -> Vec<Complex64> {
        self.inner.psi.vector().iter().copied().collect()
    }

    #[getter]
    fn perturbation(&self) -> Option<f64> {
        self.inner.perturbation
    }

    /// Recheck against `rho` given as rows.
    #[pyo3(signature = (rho, dim_a, dim_b, copies = 1))]
    fn verify(&self, rho: Rows, dim_a: usize, dim_b: usize, copies: usize) -> PyResult<bool> {
        let cfg = ToleranceConfig::default();
        let s = state(&rho, dim_a, dim_b, &cfg)?;
        witness::verify_certificate(&self.inner, &s, copies, &cfg).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(route={}, value={:e}, copies={}, schmidt_rank={})",
            self.inner.route, self.inner.value, self.inner.copies, self.inner.schmidt_rank
        )
    }
}

#[pyfunction]
fn build_sigma(b: f64, theta: f64) -> PyResult<Rows> {
    let p = EdgeParams::new(b, theta, 0.0).map_err(py_err)?;
    Ok(to_rows(
        edgestate::build_sigma(&p).map_err(py_err)?.matrix(),
    ))
}

#[pyfunction]
fn p1(b: f64, theta: f64) -> PyResult<f64> {
    Ok(edgestate::p1_formula(
        &EdgeParams::new(b, theta, 0.0).map_err(py_err)?,
    ))
}

/// Returns `(rho, eps_used, p1, margin)`. `eps=None` means `0.9 p1/3`.
#[pyfunction]
#[pyo3(signature = (b, theta, eps = None))]
fn build_rho(b: f64, theta: f64, eps: Option<f64>) -> PyResult<(Rows, f64, f64, f64)> {
    let p = match eps {
        Some(e) => EdgeParams::new(b, theta, e),
        None => EdgeParams::with_default_eps(b, theta),
    }
    .map_err(py_err)?;
    let bundle = edgestate::build_rho(&p, &ToleranceConfig::default()).map_err(py_err)?;
    Ok((
        to_rows(bundle.rho.matrix()),
        bundle.params.eps,
        bundle.p1,
        bundle.margin,
    ))
}

#[pyfunction]
fn partial_transpose(m: Rows, dim_a: usize, dim_b: usize) -> PyResult<Rows> {
    let dims = BipartiteDims::new(dim_a, dim_b).map_err(py_err)?;
    Ok(to_rows(
        &qcore::partial_transpose(&to_matrix(&m)?, dims).map_err(py_err)?,
    ))
}

#[pyfunction]
fn is_ppt(rho: Rows, dim_a: usize, dim_b: usize) -> PyResult<bool> {
    let cfg = ToleranceConfig::default();
    state(&rho, dim_a, dim_b, &cfg)?
        .is_ppt(&cfg)
        .map_err(py_err)
}

/// Witness search on `copies` copies. Returns a `Certificate` or `None`.
#[pyfunction]
#[pyo3(signature = (rho, dim_a, dim_b, copies = 1, restarts = None, seed = None))]
fn certify(
    py: Python<'_>,
    rho: Rows,
    dim_a: usize,
    dim_b: usize,
    copies: usize,
    restarts: Option<usize>,
    seed: Option<u64>,
) -> PyResult<Option<PyCertificate>> {
    let cfg = config(restarts, seed)?;
    let s = state(&rho, dim_a, dim_b, &cfg)?;
    let c = py
        .detach(|| witness::certify_n_copies(&s, copies, &cfg))
        .map_err(py_err)?;
    Ok(match c {
        Certification::Certified(inner) => Some(PyCertificate { inner }),
        _ => None,
    })
}

/// `(value, vector)` of the best Schmidt-rank-two `ψ` for `⟨ψ|X|ψ⟩`.
#[pyfunction]
#[pyo3(signature = (x, dim_a, dim_b, restarts = None, seed = None))]
fn min_rank2_expectation(
    py: Python<'_>,
    x: Rows,
    dim_a: usize,
    dim_b: usize,
    restarts: Option<usize>,
    seed: Option<u64>,
) -> PyResult<(f64, Vec<Complex64>)> {
    let cfg = config(restarts, seed)?;
    let dims = BipartiteDims::new(dim_a, dim_b).map_err(py_err)?;
    let m = to_matrix(&x)?;
    let min = py
        .detach(|| witness::min_rank2_expectation(&m, dims, &cfg))
        .map_err(py_err)?;
    Ok((min.value, min.vector().iter().copied().collect()))
}

#[pyfunction]
fn random_state(dim_a: usize, dim_b: usize, rank: usize, seed: u64) -> PyResult<Rows> {
    let dims = BipartiteDims::new(dim_a, dim_b).map_err(py_err)?;
    let s = harness::random_state(dims, rank, seed, &ToleranceConfig::default()).map_err(py_err)?;
    Ok(to_rows(s.matrix()))
}

/// Werner-state rank-two extremes for `n` copies, as JSON.
#[pyfunction]
fn werner_report(py: Python<'_>, n: usize) -> PyResult<String> {
    let r = py
        .detach(|| multicopy::extremal_rank2_tensor_power(n, &ToleranceConfig::default()))
        .map_err(py_err)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Largest dyadic ε certified by the n-copy bound.
#[pyfunction]
fn eps_threshold(b: f64, theta: f64, n: usize) -> PyResult<f64> {
    let p = EdgeParams::new(b, theta, 0.0).map_err(py_err)?;
    Ok(
        multicopy::eps_threshold_for_n(&p, n, &ToleranceConfig::default())
            .map_err(py_err)?
            .eps,
    )
}

/// Runs a verification suite; returns the reports as JSON.
#[pyfunction]
fn run_suite(py: Python<'_>, name: &str, trials: usize, seed: u64) -> PyResult<String> {
    let suite: SuiteName = name.parse().map_err(py_err)?;
    let spec = suite.default_spec(trials, seed).map_err(py_err)?;
    let reports = py
        .detach(|| harness::run_suite(suite, &spec, &ToleranceConfig::default()))
        .map_err(py_err)?;
    serde_json::to_string(&reports).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "distill_lab")]
fn distill_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(build_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(p1, m)?)?;
    m.add_function(wrap_pyfunction!(build_rho, m)?)?;
    m.add_function(wrap_pyfunction!(partial_transpose, m)?)?;
    m.add_function(wrap_pyfunction!(is_ppt, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(min_rank2_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(random_state, m)?)?;
    m.add_function(wrap_pyfunction!(werner_report, m)?)?;
    m.add_function(wrap_pyfunction!(eps_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
