//! Python bindings: noise realizations, spectral fields, propagator tables,
//! the two solvers, the correction field and the experiment runners.

use pyo3::exceptions::{PyIndexError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pam_core::harness::{self, ExperimentConfig, Format, PhiSpec};
use pam_core::noise::{sample, MultiIndex, NoiseRealization};
use pam_core::{correction, spectral, strat, wick, Error, SpectralField};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain { .. } | Error::NonFinite { .. } | Error::Config(_) | Error::Usage(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Index(_) | Error::OffGrid { .. } => PyIndexError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Numerical(_) | Error::Serde(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Gaussian coordinates ξ_1..ξ_K of the noise.
#[pyclass(name = "Noise", module = "pam_py", frozen)]
pub struct PyNoise(NoiseRealization);

#[pymethods]
impl PyNoise {
    #[new]
    fn new(seed: u64, modes: usize) -> PyResult<Self> {
        sample(seed, modes).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_xi(xi: Vec<f64>) -> Self {
        Self(NoiseRealization::from_xi(xi))
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        NoiseRealization::from_json(s).map(Self).map_err(py_err)
    }

    #[getter]
    fn seed(&self) -> Option<u64> {
        self.0.seed
    }

    #[getter]
    fn modes(&self) -> usize {
        self.0.modes
    }

    #[getter]
    fn xi(&self) -> Vec<f64> {
        self.0.xi.clone()
    }

    fn truncated(&self, modes: usize) -> PyResult<Self> {
        self.0.truncated(modes).map(Self).map_err(py_err)
    }

    fn brownian(&self, x: f64) -> PyResult<f64> {
        self.0.brownian_eval(x).map_err(py_err)
    }

    fn white_noise(&self, x: f64) -> PyResult<f64> {
        self.0.white_noise_eval(x).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Noise(seed={:?}, modes={})", self.0.seed, self.0.modes)
    }
}

/// Sine-series coefficients `a_k` of `Σ a_k m_k(x)`.
#[pyclass(name = "Field", module = "pam_py", frozen)]
pub struct PyField(SpectralField);

#[pymethods]
impl PyField {
    #[new]
    fn new(coeffs: Vec<f64>) -> Self {
        Self(SpectralField::new(coeffs))
    }

    /// Named preset (`sin`, `bump`) or `coeffs:a,b,...` on `modes` modes.
    #[staticmethod]
    fn preset(spec: &str, modes: usize) -> PyResult<Self> {
        PhiSpec::parse(spec)
            .and_then(|p| p.field(modes))
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn modes(&self) -> usize {
        self.0.modes()
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    fn eval_many(&self, xs: Vec<f64>) -> Vec<f64> {
        self.0.eval_many(&xs)
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }

    fn sobolev_norm(&self, gamma: f64) -> f64 {
        spectral::sobolev_norm(&self.0, gamma)
    }

    fn heat_evolve(&self, t: f64) -> PyResult<Self> {
        spectral::heat_evolve(&self.0, t).map(Self).map_err(py_err)
    }

    fn __sub__(&self, other: &PyField) -> Self {
        Self(self.0.sub(&other.0))
    }

    fn __repr__(&self) -> String {
        format!("Field(modes={})", self.0.modes())
    }
}

/// Chaos propagator table `u_α(t)` for `|α| ≤ N` at ε = 1.
#[pyclass(name = "PropagatorTable", module = "pam_py", frozen)]
pub struct PyTable(wick::PropagatorTable);

#[pymethods]
impl PyTable {
    #[new]
    #[pyo3(signature = (phi, modes, order, t_grid, steps_per_interval = 64))]
    fn new(
        phi: &PyField,
        modes: usize,
        order: usize,
        t_grid: Vec<f64>,
        steps_per_interval: usize,
    ) -> PyResult<Self> {
        wick::build_table(&phi.0, modes, order, &t_grid, steps_per_interval)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn modes(&self) -> usize {
        self.0.modes
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order
    }

    #[getter]
    fn t_grid(&self) -> Vec<f64> {
        self.0.t_grid().to_vec()
    }

    fn entry(&self, alpha: Vec<u32>, t: f64) -> PyResult<PyField> {
        self.0
            .entry(&MultiIndex::new(alpha), t)
            .map(PyField)
            .map_err(py_err)
    }

    fn series_term(&self, n: usize, t: f64, noise: &PyNoise) -> PyResult<PyField> {
        wick::wick_series_term(&self.0, n, t, &noise.0)
            .map(PyField)
            .map_err(py_err)
    }

    #[pyo3(signature = (eps, t, noise, order = None))]
    fn solution(
        &self,
        eps: f64,
        t: f64,
        noise: &PyNoise,
        order: Option<usize>,
    ) -> PyResult<PyField> {
        wick::wick_solution_to_order(&self.0, eps, t, &noise.0, order.unwrap_or(self.0.order))
            .map(|s| PyField(s.field))
            .map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(py_err)
    }
}

#[pyfunction]
fn heat_kernel(t: f64, x: f64, y: f64) -> PyResult<f64> {
    spectral::heat_kernel_eval(t, x, y).map_err(py_err)
}

#[pyfunction]
fn triple_coeff(j: usize, k: usize, l: usize) -> f64 {
    spectral::triple_coeff(j, k, l)
}

#[pyfunction]
fn strat_solution(phi: &PyField, noise: &PyNoise, eps: f64, t: f64) -> PyResult<PyField> {
    strat::strat_solution(&phi.0, &noise.0, eps, t)
        .map(PyField)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (phi, noise, eps, t, order, steps_per_interval = 64))]
fn strat_series_solution(
    phi: &PyField,
    noise: &PyNoise,
    eps: f64,
    t: f64,
    order: usize,
    steps_per_interval: usize,
) -> PyResult<PyField> {
    strat::strat_series_solution(&phi.0, &noise.0, eps, t, order, steps_per_interval)
        .map(|s| PyField(s.field))
        .map_err(py_err)
}

#[pyfunction]
fn correction_field(phi: &PyField, t: f64, k_basis: usize, k_diag: usize) -> PyResult<PyField> {
    correction::correction_field(&phi.0, t, k_basis, k_diag)
        .map(PyField)
        .map_err(py_err)
}

#[pyfunction]
fn second_order_gap(table: &PyTable, phi: &PyField, noise: &PyNoise, t: f64) -> PyResult<PyField> {
    correction::second_order_gap(&table.0, &phi.0, &noise.0, t)
        .map(PyField)
        .map_err(py_err)
}

#[pyfunction]
fn triple_exp_convolution(a: f64, b: f64, c: f64, t: f64) -> f64 {
    correction::triple_exp_convolution(a, b, c, t)
}

/// Default experiment configuration as JSON.
#[pyfunction]
fn default_config() -> String {
    serde_json::to_string(&ExperimentConfig::default()).expect("config serializes")
}

fn config_from(json: Option<&str>) -> PyResult<ExperimentConfig> {
    let c = match json {
        Some(s) => ExperimentConfig::from_json(s).map_err(py_err)?,
        None => ExperimentConfig::default(),
    };
    c.validate().map_err(py_err)?;
    Ok(c)
}

fn render<R: harness::Report>(report: &R) -> PyResult<String> {
    let mut buf = Vec::new();
    harness::write_report(report, Format::Json, &mut buf).map_err(py_err)?;
    String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Run the ε-ladder; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (config_json = None))]
fn run_ladder(py: Python<'_>, config_json: Option<&str>) -> PyResult<String> {
    let config = config_from(config_json)?;
    let report = py.detach(|| harness::run_ladder(&config)).map_err(py_err)?;
    render(&report)
}

#[pyfunction]
#[pyo3(signature = (config_json = None))]
fn run_first_order_check(py: Python<'_>, config_json: Option<&str>) -> PyResult<String> {
    let config = config_from(config_json)?;
    let report = py
        .detach(|| harness::run_first_order_check(&config))
        .map_err(py_err)?;
    render(&report)
}

#[pyfunction]
#[pyo3(signature = (config_json = None))]
fn run_k_convergence(py: Python<'_>, config_json: Option<&str>) -> PyResult<String> {
    let config = config_from(config_json)?;
    let report = py
        .detach(|| harness::run_k_convergence(&config))
        .map_err(py_err)?;
    render(&report)
}

#[pymodule]
fn pam_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNoise>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyTable>()?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(triple_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(strat_solution, m)?)?;
    m.add_function(wrap_pyfunction!(strat_series_solution, m)?)?;
    m.add_function(wrap_pyfunction!(correction_field, m)?)?;
    m.add_function(wrap_pyfunction!(second_order_gap, m)?)?;
    m.add_function(wrap_pyfunction!(triple_exp_convolution, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(run_first_order_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_k_convergence, m)?)?;
    Ok(())
}
