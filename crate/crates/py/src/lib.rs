//! Python bindings for `coopreg`.
//!
//! Matrices cross the boundary as lists of rows; reports and traces come
//! back as plain dicts.

use coopreg::design::DesignProblem as CoreDesign;
use coopreg::linalg::{matrix_from_rows, matrix_to_rows, vector_to_vec};
use coopreg::observer::{ObserverBank as CoreBank, TriggerFunction};
use coopreg::simkit::{self, builtin, Scenario as CoreScenario, Trace as CoreTrace};
use coopreg::{interevent, netgraph, regulation, spectra, Digraph, Error, LeaderModel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

type Rows = Vec<Vec<f64>>;
/// `(h, feasible, gain interval)`
type SweepRow = (f64, bool, Option<(f64, f64)>);

pyo3::create_exception!(coopreg_py, InfeasibleDesign, PyValueError);

fn err(e: Error) -> PyErr {
    match e {
        Error::InfeasibleDesign(_) => InfeasibleDesign::new_err(e.to_string()),
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: &Rows) -> PyResult<DMatrix<f64>> {
    matrix_from_rows(rows).map_err(err)
}

fn graph(followers: usize, edges: Vec<(usize, usize)>) -> PyResult<Digraph> {
    Digraph::new(followers, edges).map_err(err)
}

/// Serializes through JSON into native Python objects.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Laplacian and its leader-deleted block `H` of a leader-follower digraph.
#[pyfunction]
fn laplacian_and_h(followers: usize, edges: Vec<(usize, usize)>) -> PyResult<(Rows, Rows)> {
    let m = netgraph::build_laplacian_and_h(&graph(followers, edges)?);
    Ok((matrix_to_rows(&m.laplacian), matrix_to_rows(&m.h)))
}

#[pyfunction]
fn has_spanning_tree(followers: usize, edges: Vec<(usize, usize)>) -> PyResult<bool> {
    Ok(netgraph::check_spanning_tree(&graph(followers, edges)?).has_root_spanning_tree)
}

#[pyfunction]
fn eigenvalues(m: Rows) -> PyResult<Vec<Complex64>> {
    coopreg::linalg::eigenvalues(&matrix(&m)?).map_err(err)
}

#[pyfunction]
fn expm(m: Rows) -> PyResult<Rows> {
    spectra::expm(&matrix(&m)?).map(|e| matrix_to_rows(&e)).map_err(err)
}

/// `(alpha, beta, gamma)` of the gain quadratic for one eigenvalue pair.
#[pyfunction]
fn pair_coefficients(lambda_i: Complex64, lambda_q: Complex64, h: f64) -> (f64, f64, f64) {
    coopreg::design::pair_coefficients(lambda_i, lambda_q, h)
}

/// `(F, G)` of the sampled estimation-error dynamics.
#[pyfunction]
fn error_dynamics(s: Rows, h_matrix: Rows, mu: f64, h: f64) -> PyResult<(Rows, Rows)> {
    let ed = coopreg::observer::build_error_dynamics(&matrix(&s)?, &matrix(&h_matrix)?, mu, h).map_err(err)?;
    Ok((matrix_to_rows(&ed.f), matrix_to_rows(&ed.g)))
}

/// `(gamma, beta, settled)` with `||F^k|| <= beta gamma^k`.
#[pyfunction]
fn contraction(f: Rows) -> PyResult<(f64, f64, bool)> {
    let c = interevent::contraction(&matrix(&f)?).map_err(err)?;
    Ok((c.gamma, c.beta, c.settled))
}

/// `(X, U, residual_state, residual_output)`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn solve_regulator(a: Rows, b: Rows, c: Rows, d: Rows, p: Rows, f: Rows, s: Rows) -> PyResult<(Rows, Rows, f64, f64)> {
    let s = matrix(&s)?;
    let model = regulation::FollowerModel::new(
        matrix(&a)?,
        matrix(&b)?,
        matrix(&c)?,
        matrix(&d)?,
        matrix(&p)?,
        matrix(&f)?,
        s.nrows(),
    )
    .map_err(err)?;
    let sol = regulation::solve_regulator(&model, &s).map_err(err)?;
    Ok((matrix_to_rows(&sol.x), matrix_to_rows(&sol.u), sol.residual_state, sol.residual_output))
}

/// Sampled-data observer design for a leader `S` over a digraph.
#[pyclass(frozen)]
struct DesignProblem {
    inner: CoreDesign,
}

#[pymethods]
impl DesignProblem {
    #[new]
    fn new(s: Rows, followers: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let leader = LeaderModel::new(matrix(&s)?).map_err(err)?;
        let inner = CoreDesign::new(&leader, &graph(followers, edges)?).map_err(err)?;
        Ok(Self { inner })
    }

    fn follower_eigenvalues(&self) -> Vec<Complex64> {
        self.inner.follower_eigenvalues().to_vec()
    }

    fn feasibility<'py>(&self, py: Python<'py>, h: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.feasibility(h).map_err(err)?)
    }

    fn is_feasible(&self, h: f64) -> PyResult<bool> {
        Ok(self.inner.feasibility(h).map_err(err)?.feasible)
    }

    fn mu_interval(&self, h: f64) -> PyResult<Option<(f64, f64)>> {
        Ok(self.inner.mu_interval(h).map_err(err)?.intersection)
    }

    fn sweep_h(&self, grid: Vec<f64>) -> PyResult<Vec<SweepRow>> {
        let rows = self.inner.sweep_h(&grid).map_err(err)?;
        Ok(rows.into_iter().map(|r| (r.h, r.feasible, r.interval)).collect())
    }

    fn sinusoidal_intervals(&self, h_max: f64) -> PyResult<Vec<(f64, f64)>> {
        self.inner.sinusoidal_intervals(h_max).map_err(err)
    }
}

/// Observers of all followers, advanced one sampling period at a time.
#[pyclass]
struct ObserverBank {
    inner: CoreBank,
}

#[pymethods]
impl ObserverBank {
    /// `trigger` is `None` for time-triggered operation, or
    /// `(kind, sigma, alpha)` with kind in exponential/rational/log_exp.
    #[new]
    #[pyo3(signature = (s, followers, edges, mu, h, eta0, v0, trigger=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        s: Rows,
        followers: usize,
        edges: Vec<(usize, usize)>,
        mu: f64,
        h: f64,
        eta0: Rows,
        v0: Vec<f64>,
        trigger: Option<(String, f64, f64)>,
    ) -> PyResult<Self> {
        let f = match trigger {
            None => TriggerFunction::Always,
            Some((kind, sigma, alpha)) => match kind.as_str() {
                "exponential" => TriggerFunction::exponential(sigma, alpha),
                "rational" => TriggerFunction::rational(sigma, alpha),
                "log_exp" => TriggerFunction::log_exp(sigma, alpha),
                other => return Err(PyValueError::new_err(format!("unknown trigger {other:?}"))),
            }
            .map_err(err)?,
        };
        let g = graph(followers, edges)?;
        let eta0 = eta0.iter().map(|e| DVector::from_column_slice(e)).collect();
        let inner = CoreBank::new(&matrix(&s)?, &g, mu, h, vec![f; followers], eta0, &DVector::from_vec(v0))
            .map_err(err)?;
        Ok(Self { inner })
    }

    /// Advances one period given the leader state at the new instant;
    /// returns the followers (1-based) that broadcast.
    fn step(&mut self, v_next: Vec<f64>) -> PyResult<Vec<usize>> {
        self.inner.step(&DVector::from_vec(v_next)).map_err(err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t()
    }

    #[getter]
    fn eta(&self) -> Rows {
        self.inner.eta().iter().map(vector_to_vec).collect()
    }

    fn estimation_error(&self, v: Vec<f64>) -> Vec<f64> {
        vector_to_vec(&self.inner.estimation_error(&DVector::from_vec(v)))
    }

    /// `(follower, l, k, t, steps)` per broadcast.
    fn events(&self) -> Vec<(usize, usize, u64, f64, Option<u64>)> {
        self.inner.events().iter().map(|e| (e.follower, e.l, e.k, e.t, e.steps)).collect()
    }
}

/// A simulation scenario (the JSON schema used by the CLI).
#[pyclass(frozen)]
struct Scenario {
    inner: CoreScenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreScenario::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn example(index: u32) -> PyResult<Self> {
        builtin::builtin(index)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no example {index}")))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// Resolved observer gain (an `"auto"` gain is computed).
    fn observer_gain(&self) -> PyResult<f64> {
        Ok(self.inner.prepare().map_err(err)?.mu)
    }

    fn run(&self, py: Python<'_>) -> PyResult<Trace> {
        let sc = self.inner.clone();
        let inner = py.detach(move || simkit::run(&sc)).map_err(err)?;
        Ok(Trace { inner })
    }
}

/// Simulation output.
#[pyclass(frozen)]
struct Trace {
    inner: CoreTrace,
}

#[pymethods]
impl Trace {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreTrace::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.t).collect()
    }

    /// `max_i ||eta_i - v||` per sample.
    #[getter]
    fn estimation_errors(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.eta_error.iter().copied().fold(0.0, f64::max)).collect()
    }

    fn final_estimation_error(&self) -> Option<f64> {
        self.inner.final_estimation_error()
    }

    fn final_regulation_error(&self) -> Option<f64> {
        if self.inner.state_dims.is_empty() {
            None
        } else {
            self.inner.final_regulation_error()
        }
    }

    fn observer_steps(&self, follower: usize) -> Vec<u64> {
        self.inner.observer_steps(follower)
    }

    #[getter]
    fn observer_event_count(&self) -> usize {
        self.inner.observer_events.len()
    }

    #[getter]
    fn controller_event_count(&self) -> usize {
        self.inner.controller_events.len()
    }

    /// Writes `trace.csv` (or `trace.json`) and the event files into `dir`.
    #[pyo3(signature = (dir, format="csv"))]
    fn export(&self, dir: &str, format: &str) -> PyResult<Vec<String>> {
        let fmt = format.parse().map_err(err)?;
        let files = simkit::export(&self.inner, dir, fmt).map_err(err)?;
        Ok(files.iter().map(|f| f.display().to_string()).collect())
    }
}

#[pymodule]
fn coopreg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfeasibleDesign", m.py().get_type::<InfeasibleDesign>())?;
    m.add_class::<DesignProblem>()?;
    m.add_class::<ObserverBank>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(laplacian_and_h, m)?)?;
    m.add_function(wrap_pyfunction!(has_spanning_tree, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(expm, m)?)?;
    m.add_function(wrap_pyfunction!(pair_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(error_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(contraction, m)?)?;
    m.add_function(wrap_pyfunction!(solve_regulator, m)?)?;
    Ok(())
}
