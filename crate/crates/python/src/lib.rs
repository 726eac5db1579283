//! Python bindings: potentials, numerics settings, ground states, sweeps and
//! the checking oracles. Errors on bad input raise `ValueError`; solver
//! failures raise `ab_spectra.NumericalError` (a `RuntimeError`).

use ab_spectra_core::eigensolve::{lowest_k as core_lowest_k, SymTridiagonal};
use ab_spectra_core::gauge::{is_gqr as core_is_gqr, DEFAULT_GQR_TOL};
use ab_spectra_core::model::{
    canonical_circulation as core_canonical, NumericsConfig, PotentialSpec,
};
use ab_spectra_core::oracle2d::compare_with_radial as core_compare;
use ab_spectra_core::spectrum::{self, GroundState, SweepResult};
use ab_spectra_core::{io, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(ab_spectra, NumericalError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "PotentialSpec")]
struct PyPotentialSpec {
    inner: PotentialSpec,
}

#[pymethods]
impl PyPotentialSpec {
    #[new]
    #[pyo3(signature = (a=1.0, beta=1.0, p=2.0, omega=1.0, q=2.0))]
    fn new(a: f64, beta: f64, p: f64, omega: f64, q: f64) -> Self {
        Self {
            inner: PotentialSpec {
                a,
                beta,
                p,
                omega,
                q,
            },
        }
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }
    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }
    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    /// Names of the violated conditions; empty when the potential is valid.
    fn violations(&self) -> Vec<String> {
        self.inner
            .validate()
            .names()
            .into_iter()
            .map(String::from)
            .collect()
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().is_ok()
    }

    fn evaluate(&self, r: f64) -> PyResult<f64> {
        self.inner.evaluate(r).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "PotentialSpec(a={}, beta={}, p={}, omega={}, q={})",
            s.a, s.beta, s.p, s.omega, s.q
        )
    }
}

#[pyclass(name = "NumericsConfig")]
struct PyNumericsConfig {
    inner: NumericsConfig,
}

#[pymethods]
impl PyNumericsConfig {
    #[new]
    #[pyo3(signature = (max_mode=3, eig_tol=1e-10, deg_tol=1e-8, r_growth=2.0, r_tol=1e-8, n_default=4000))]
    fn new(
        max_mode: i64,
        eig_tol: f64,
        deg_tol: f64,
        r_growth: f64,
        r_tol: f64,
        n_default: usize,
    ) -> PyResult<Self> {
        let inner = NumericsConfig {
            max_mode,
            eig_tol,
            deg_tol,
            r_growth,
            r_tol,
            n_default,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn max_mode(&self) -> i64 {
        self.inner.max_mode
    }
    #[getter]
    fn eig_tol(&self) -> f64 {
        self.inner.eig_tol
    }
    #[getter]
    fn deg_tol(&self) -> f64 {
        self.inner.deg_tol
    }
    #[getter]
    fn n_default(&self) -> usize {
        self.inner.n_default
    }

    fn __repr__(&self) -> String {
        let n = &self.inner;
        format!(
            "NumericsConfig(max_mode={}, eig_tol={:e}, deg_tol={:e}, r_growth={}, r_tol={:e}, n_default={})",
            n.max_mode, n.eig_tol, n.deg_tol, n.r_growth, n.r_tol, n.n_default
        )
    }
}

#[pyclass(name = "GroundState")]
struct PyGroundState {
    inner: GroundState,
    numerics: NumericsConfig,
}

#[pymethods]
impl PyGroundState {
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }
    #[getter]
    fn lambda1(&self) -> f64 {
        self.inner.lambda1
    }
    #[getter]
    fn mode_star(&self) -> i64 {
        self.inner.mode_star
    }
    /// Mesh nodes.
    #[getter]
    fn r(&self) -> Vec<f64> {
        self.inner.mesh.nodes().collect()
    }
    /// Unit-norm eigenvector in the variable `g = sqrt(r) psi`.
    #[getter]
    fn g(&self) -> Vec<f64> {
        self.inner.g.clone()
    }
    /// Radial profile `g / sqrt(r)`.
    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.radial_profile()
    }
    #[getter]
    fn multiplicity(&self) -> usize {
        self.inner.degeneracy(&self.numerics).multiplicity
    }
    #[getter]
    fn degenerate_modes(&self) -> Vec<i64> {
        self.inner.degeneracy(&self.numerics).modes
    }

    /// Hellmann-Feynman derivative; raises `ValueError` at integer and
    /// half-integer circulations.
    fn hf_derivative(&self) -> PyResult<f64> {
        spectrum::hf_derivative(&self.inner, &self.numerics).map_err(to_py)
    }

    /// The structured text record (header, blank line, `r<TAB>psi` rows).
    fn to_record(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        io::write_ground_state(&self.inner, &mut buf).map_err(to_py)?;
        Ok(String::from_utf8(buf).expect("record is ASCII"))
    }

    fn __repr__(&self) -> String {
        format!(
            "GroundState(kappa={}, lambda1={}, mode_star={}, n={})",
            self.inner.kappa,
            self.inner.lambda1,
            self.inner.mode_star,
            self.inner.mesh.len()
        )
    }
}

fn resolve(
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> (PotentialSpec, NumericsConfig) {
    (
        spec.map(|s| s.inner).unwrap_or_default(),
        numerics.map(|n| n.inner).unwrap_or_default(),
    )
}

#[pyfunction]
fn canonical_circulation(kappa: f64) -> PyResult<f64> {
    core_canonical(kappa).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (kappa1, kappa2, tol=DEFAULT_GQR_TOL))]
fn is_gqr(kappa1: f64, kappa2: f64, tol: f64) -> bool {
    core_is_gqr(kappa1, kappa2, tol)
}

#[pyfunction]
#[pyo3(signature = (kappa, spec=None, numerics=None))]
fn ground_state(
    py: Python<'_>,
    kappa: f64,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<PyGroundState> {
    let (spec, numerics) = resolve(spec, numerics);
    let inner = py
        .detach(|| spectrum::ground_state(kappa, &spec, &numerics))
        .map_err(to_py)?;
    Ok(PyGroundState { inner, numerics })
}

#[pyfunction]
#[pyo3(signature = (kappa, h=1e-4, spec=None, numerics=None))]
fn fd_derivative(
    py: Python<'_>,
    kappa: f64,
    h: f64,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<f64> {
    let (spec, numerics) = resolve(spec, numerics);
    py.detach(|| spectrum::fd_derivative(kappa, h, &spec, &numerics))
        .map_err(to_py)
}

/// `(multiplicity, modes, energies)` at `kappa`.
#[pyfunction]
#[pyo3(signature = (kappa, spec=None, numerics=None))]
fn degeneracy(
    py: Python<'_>,
    kappa: f64,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<(usize, Vec<i64>, Vec<f64>)> {
    let (spec, numerics) = resolve(spec, numerics);
    let d = py
        .detach(|| spectrum::degeneracy_multiplicity(kappa, &spec, &numerics))
        .map_err(to_py)?;
    Ok((d.multiplicity, d.modes, d.energies))
}

fn run_sweep(
    py: Python<'_>,
    kappa_from: f64,
    kappa_to: f64,
    steps: usize,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<SweepResult> {
    let (spec, numerics) = resolve(spec, numerics);
    py.detach(|| spectrum::sweep(kappa_from, kappa_to, steps, &spec, &numerics))
        .map_err(to_py)
}

/// Columns `kappa`, `lambda1`, `mode`, `deriv_hf`, `deriv_fd` as lists;
/// undefined derivatives are `None`.
#[pyfunction]
#[pyo3(signature = (kappa_from, kappa_to, steps, spec=None, numerics=None))]
fn sweep<'py>(
    py: Python<'py>,
    kappa_from: f64,
    kappa_to: f64,
    steps: usize,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = run_sweep(py, kappa_from, kappa_to, steps, spec, numerics)?;
    let d = PyDict::new(py);
    d.set_item("kappa", s.kappas)?;
    d.set_item("lambda1", s.lambdas)?;
    d.set_item("mode", s.modes)?;
    d.set_item("deriv_hf", s.hf_derivs)?;
    d.set_item("deriv_fd", s.fd_derivs)?;
    Ok(d)
}

/// The sweep as CSV text, byte-identical to the command-line output.
#[pyfunction]
#[pyo3(signature = (kappa_from, kappa_to, steps, spec=None, numerics=None))]
fn sweep_csv(
    py: Python<'_>,
    kappa_from: f64,
    kappa_to: f64,
    steps: usize,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<String> {
    let s = run_sweep(py, kappa_from, kappa_to, steps, spec, numerics)?;
    let mut buf = Vec::new();
    io::write_sweep_csv(&s, &mut buf).map_err(to_py)?;
    Ok(String::from_utf8(buf).expect("csv is ASCII"))
}

/// The `k` smallest eigenvalues of the symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `off`.
#[pyfunction]
#[pyo3(signature = (diag, off, k, tol=1e-10))]
fn lowest_k(diag: Vec<f64>, off: Vec<f64>, k: usize, tol: f64) -> PyResult<Vec<f64>> {
    let t = SymTridiagonal::new(diag, off).map_err(to_py)?;
    core_lowest_k(&t, k, tol).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (kappa, n_r=200, n_theta=64, spec=None, numerics=None))]
fn compare_with_radial<'py>(
    py: Python<'py>,
    kappa: f64,
    n_r: usize,
    n_theta: usize,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<Bound<'py, PyDict>> {
    let (spec, numerics) = resolve(spec, numerics);
    let c = py
        .detach(|| core_compare(kappa, &spec, &numerics, n_r, n_theta))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lambda_2d", c.lambda_2d)?;
    d.set_item("lambda_radial", c.lambda_radial)?;
    d.set_item("discrepancy", c.discrepancy)?;
    d.set_item("lambda_2d_refined", c.lambda_2d_refined)?;
    d.set_item("discrepancy_refined", c.discrepancy_refined)?;
    d.set_item("outer_radius", c.outer_radius)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (kappa, sizes=vec![1000, 2000, 4000], spec=None, numerics=None))]
fn convergence_order<'py>(
    py: Python<'py>,
    kappa: f64,
    sizes: Vec<usize>,
    spec: Option<PyRef<'_, PyPotentialSpec>>,
    numerics: Option<PyRef<'_, PyNumericsConfig>>,
) -> PyResult<Bound<'py, PyDict>> {
    let (spec, numerics) = resolve(spec, numerics);
    let s = py
        .detach(|| spectrum::convergence_order(kappa, &spec, &numerics, &sizes))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("sizes", s.sizes)?;
    d.set_item("lambdas", s.lambdas)?;
    d.set_item("order", s.order)?;
    d.set_item("extrapolated", s.extrapolated)?;
    d.set_item("outer_radius", s.outer_radius)?;
    Ok(d)
}

#[pymodule]
fn ab_spectra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyPotentialSpec>()?;
    m.add_class::<PyNumericsConfig>()?;
    m.add_class::<PyGroundState>()?;
    m.add_function(wrap_pyfunction!(canonical_circulation, m)?)?;
    m.add_function(wrap_pyfunction!(is_gqr, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(fd_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(degeneracy, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(lowest_k, m)?)?;
    m.add_function(wrap_pyfunction!(compare_with_radial, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_order, m)?)?;
    Ok(())
}
