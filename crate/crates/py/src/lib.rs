//! Python bindings: grids, fields, solvers, level sets, the radial oracle and
//! the property checks. Structured results come back as plain dicts.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use ringlab_core::cli::RunConfig;
use ringlab_core::field::discrete_c2_distance;
use ringlab_core::levelgeom::{extract_level, sigma_k};
use ringlab_core::solve::{self as core_solve, SolveOptions};
use ringlab_core::verify::{self, StandardRing};
use ringlab_core::{AnnularGrid, GridSpec, ScalarField};

fn err(e: ringlab_core::Error) -> PyErr {
    match e {
        ringlab_core::Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn options(newton_tol: Option<f64>, max_newton: Option<usize>, initial_tau: Option<f64>) -> SolveOptions {
    let mut opts = SolveOptions::default();
    if let Some(v) = newton_tol {
        opts.newton_tol = v;
    }
    if let Some(v) = max_newton {
        opts.max_newton = v;
    }
    if let Some(v) = initial_tau {
        opts.initial_tau = v;
    }
    opts
}

/// Structured grid over a convex ring.
#[pyclass(name = "Grid", frozen)]
struct PyGrid(Arc<AnnularGrid>);

#[pymethods]
impl PyGrid {
    /// One of the built-in rings: circles, ellipses, offset_ellipse,
    /// sphere_circles, sphere_ellipses.
    #[staticmethod]
    fn standard(name: &str, ns: usize, ntheta: usize) -> PyResult<Self> {
        let ring: StandardRing = serde_json::from_value(serde_json::Value::String(name.into()))
            .map_err(|_| PyValueError::new_err(format!("unknown ring {name:?}")))?;
        Ok(Self(ring.grid(ns, ntheta).map_err(err)?))
    }

    /// Concentric flat annulus.
    #[staticmethod]
    fn concentric(r_inner: f64, r_outer: f64, ns: usize, ntheta: usize) -> PyResult<Self> {
        Ok(Self(verify::concentric_grid(r_inner, r_outer, ns, ntheta).map_err(err)?))
    }

    /// Grid described by a run configuration (JSON text).
    #[staticmethod]
    #[pyo3(signature = (text, allow_negative_curvature = false))]
    fn from_config(text: &str, allow_negative_curvature: bool) -> PyResult<Self> {
        let (_, grid) = RunConfig::parse(text, allow_negative_curvature)
            .map_err(|e| PyValueError::new_err(format!("line {}: {}", e.line, e.message)))?;
        Ok(Self(Arc::new(grid)))
    }

    /// Grid from a serialized grid spec (JSON text).
    #[staticmethod]
    #[pyo3(signature = (text, allow_negative_curvature = false))]
    fn from_spec(text: &str, allow_negative_curvature: bool) -> PyResult<Self> {
        let spec: GridSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self(Arc::new(spec.build(allow_negative_curvature).map_err(err)?)))
    }

    #[getter]
    fn ns(&self) -> usize {
        self.0.ns()
    }

    #[getter]
    fn ntheta(&self) -> usize {
        self.0.ntheta()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.chart().epsilon()
    }

    #[getter]
    fn h_max(&self) -> f64 {
        self.0.h_max()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Node coordinates, row by row from the outer boundary.
    fn nodes(&self) -> Vec<(f64, f64)> {
        self.0.nodes().iter().map(|p| (p[0], p[1])).collect()
    }

    fn spec<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.spec())
    }

    fn __repr__(&self) -> String {
        format!("Grid(ns={}, ntheta={}, epsilon={})", self.0.ns(), self.0.ntheta(), self.0.chart().epsilon())
    }
}

/// Nodal values on a grid.
#[pyclass(name = "Field", frozen)]
#[derive(Clone)]
struct PyField(ScalarField);

#[pymethods]
impl PyField {
    #[new]
    fn new(grid: &PyGrid, values: Vec<f64>, outer_value: f64, inner_value: f64) -> PyResult<Self> {
        Ok(Self(ScalarField::new(grid.0.clone(), values, outer_value, inner_value).map_err(err)?))
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid_arc().clone())
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let g = self.0.grid();
        if i > g.ns() || j >= g.ntheta() {
            return Err(PyValueError::new_err(format!("node ({i}, {j}) is outside the grid")));
        }
        Ok(self.0.get(i, j))
    }

    /// `(outer, inner)` Dirichlet values.
    fn boundary_values(&self) -> (f64, f64) {
        self.0.boundary_values()
    }

    fn interpolate(&self, x: f64, y: f64) -> PyResult<f64> {
        self.0.interpolate([x, y]).map_err(err)
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    /// Discrete C² distance to another field on the same grid.
    fn c2_distance(&self, other: &PyField) -> PyResult<f64> {
        discrete_c2_distance(&self.0, &other.0).map_err(err)
    }

    /// Self-contained snapshot as a JSON string.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0.to_snapshot()).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[staticmethod]
    #[pyo3(signature = (text, allow_negative_curvature = false))]
    fn from_json(text: &str, allow_negative_curvature: bool) -> PyResult<Self> {
        let snap = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self(ScalarField::from_snapshot(&snap, allow_negative_curvature).map_err(err)?))
    }
}

/// Accepted continuation steps and their solutions.
#[pyclass(name = "Trace", frozen)]
struct PyTrace(core_solve::ContinuationTrace);

#[pymethods]
impl PyTrace {
    #[getter]
    fn taus(&self) -> Vec<f64> {
        self.0.steps.iter().map(|s| s.tau).collect()
    }

    #[getter]
    fn last_good_tau(&self) -> f64 {
        self.0.last_good_tau()
    }

    fn solutions(&self) -> Vec<PyField> {
        self.0.solutions.iter().cloned().map(PyField).collect()
    }

    fn final_solution(&self) -> Option<PyField> {
        self.0.final_solution().cloned().map(PyField)
    }

    fn solution_at(&self, tau: f64) -> Option<PyField> {
        self.0.solution_at(tau).cloned().map(PyField)
    }

    /// Per-step diagnostics as a dict.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __len__(&self) -> usize {
        self.0.steps.len()
    }
}

#[pyfunction]
#[pyo3(signature = (grid, tau, newton_tol = None, max_newton = None))]
fn solve_harmonic(grid: &PyGrid, tau: f64, newton_tol: Option<f64>, max_newton: Option<usize>) -> PyResult<PyField> {
    let opts = options(newton_tol, max_newton, None);
    Ok(PyField(core_solve::solve_harmonic(&grid.0, tau, &opts).map_err(err)?))
}

/// Minimal graph by continuation through the given heights.
#[pyfunction]
#[pyo3(signature = (grid, taus, newton_tol = None, max_newton = None, initial_tau = None))]
fn solve(
    py: Python<'_>,
    grid: &PyGrid,
    taus: Vec<f64>,
    newton_tol: Option<f64>,
    max_newton: Option<usize>,
    initial_tau: Option<f64>,
) -> PyResult<PyTrace> {
    let opts = options(newton_tol, max_newton, initial_tau);
    let g = grid.0.clone();
    let trace = py.allow_threads(|| core_solve::continuation_solve(&g, &taus, &opts)).map_err(err)?;
    Ok(PyTrace(trace))
}

#[pyfunction]
fn supersolution(omega: &PyField, tau: f64) -> PyResult<PyField> {
    Ok(PyField(core_solve::build_supersolution(&omega.0, tau).map_err(err)?))
}

/// Level curve `{u = level}` with its curvature samples.
#[pyfunction]
fn level_set<'py>(py: Python<'py>, field: &PyField, level: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &extract_level(&field.0, level).map_err(err)?)
}

#[pyfunction]
#[pyo3(name = "sigma_k")]
fn py_sigma_k(values: Vec<f64>, k: isize) -> f64 {
    sigma_k(&values, k)
}

/// Exact rotationally symmetric solution on a flat annulus.
#[pyclass(name = "RadialOracle", frozen)]
struct PyRadialOracle(verify::RadialOracle);

#[pymethods]
impl PyRadialOracle {
    #[new]
    #[pyo3(signature = (r_inner, r_outer, tau, dim = 2))]
    fn new(r_inner: f64, r_outer: f64, tau: f64, dim: usize) -> PyResult<Self> {
        Ok(Self(verify::radial_oracle(r_inner, r_outer, tau, dim).map_err(err)?))
    }

    #[getter]
    fn flux(&self) -> f64 {
        self.0.flux
    }

    #[getter]
    fn max_height(&self) -> f64 {
        self.0.max_height
    }

    fn value(&self, r: f64) -> f64 {
        self.0.value(r)
    }

    fn derivative(&self, r: f64) -> f64 {
        self.0.derivative(r)
    }
}

fn report<'py>(py: Python<'py>, r: ringlab_core::Result<verify::VerificationReport>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &r.map_err(err)?)
}

#[pyfunction]
fn check_gradient_max_principle<'py>(py: Python<'py>, field: &PyField) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_gradient_max_principle(&field.0))
}

#[pyfunction]
fn check_gradient_monotonicity<'py>(py: Python<'py>, field: &PyField) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_gradient_monotonicity(&field.0))
}

#[pyfunction]
fn check_convexity_and_rank<'py>(py: Python<'py>, field: &PyField, levels: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_convexity_and_rank(&field.0, &levels))
}

#[pyfunction]
fn check_supersolution<'py>(py: Python<'py>, u: &PyField, omega: &PyField, tau: f64) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_supersolution(&u.0, &omega.0, tau))
}

#[pyfunction]
fn check_hopf_boundary_bound<'py>(py: Python<'py>, trace: &PyTrace) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::check_hopf_boundary_bound(&trace.0))
}

#[pyfunction]
fn check_solver_vs_oracle<'py>(
    py: Python<'py>,
    r_inner: f64,
    r_outer: f64,
    tau: f64,
    sizes: Vec<(usize, usize)>,
) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_solver_vs_oracle(r_inner, r_outer, tau, &sizes, &SolveOptions::default()))
}

#[pyfunction]
#[pyo3(signature = (count = 1000, seed = 0))]
fn check_sigma_routes<'py>(py: Python<'py>, count: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_sigma_routes(count, seed))
}

#[pyfunction]
fn check_structure_condition<'py>(py: Python<'py>, h_value: f64, epsilon: f64) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_structure_condition(h_value, epsilon))
}

#[pyfunction]
fn check_structure_examples<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    report(py, verify::check_structure_examples())
}

#[pyfunction]
fn interior_levels(tau: f64, count: usize) -> Vec<f64> {
    verify::interior_levels(tau, count)
}

/// Runs the command-line tool with the given arguments; returns the exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> PyResult<i32> {
    use clap::Parser;
    let argv = std::iter::once("ringlab".to_string()).chain(args);
    let cli = ringlab_core::cli::Cli::try_parse_from(argv).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(ringlab_core::cli::run(cli))
}

#[pymodule]
#[pyo3(name = "ringlab")]
fn ringlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyRadialOracle>()?;
    m.add_function(wrap_pyfunction!(solve_harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(supersolution, m)?)?;
    m.add_function(wrap_pyfunction!(level_set, m)?)?;
    m.add_function(wrap_pyfunction!(py_sigma_k, m)?)?;
    m.add_function(wrap_pyfunction!(check_gradient_max_principle, m)?)?;
    m.add_function(wrap_pyfunction!(check_gradient_monotonicity, m)?)?;
    m.add_function(wrap_pyfunction!(check_convexity_and_rank, m)?)?;
    m.add_function(wrap_pyfunction!(check_supersolution, m)?)?;
    m.add_function(wrap_pyfunction!(check_hopf_boundary_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_solver_vs_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(check_sigma_routes, m)?)?;
    m.add_function(wrap_pyfunction!(check_structure_condition, m)?)?;
    m.add_function(wrap_pyfunction!(check_structure_examples, m)?)?;
    m.add_function(wrap_pyfunction!(interior_levels, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
