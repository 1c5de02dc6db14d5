//! Python bindings for the `vstates` crate.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use vstates::cli::is_input_error;
use vstates::continuation::{self, SolveOptions, VStateSolution};
use vstates::evolution::{self, ContourState};
use vstates::geometry::{self, FourierBoundary, UnitGrid};
use vstates::{kernels, linearization, specfun, VStateError};

fn to_py(e: VStateError) -> PyErr {
    if is_input_error(&e) {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn check_unit(alpha: f64) -> PyResult<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!("alpha must lie in [0,1], got {alpha}")))
    }
}

fn pairs(z: &[Complex64]) -> Vec<(f64, f64)> {
    z.iter().map(|c| (c.re, c.im)).collect()
}

/// Conformal boundary w + Σ b_n w̄ⁿ.
#[pyclass(name = "Boundary", from_py_object)]
#[derive(Clone)]
pub struct PyBoundary {
    inner: FourierBoundary,
}

#[pymethods]
impl PyBoundary {
    #[new]
    fn new(coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: FourierBoundary::new(coeffs).map_err(to_py)? })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self { inner: FourierBoundary::identity(n) }
    }

    #[staticmethod]
    fn ellipse(q: f64, n: usize) -> Self {
        Self { inner: FourierBoundary::ellipse(q, n) }
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs.clone()
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.inner.truncation()
    }

    fn symmetry_order(&self) -> usize {
        self.inner.symmetry_order()
    }

    fn is_univalent(&self) -> bool {
        self.inner.is_univalent_proxy()
    }

    /// Boundary points at `samples` equispaced angles, as (x, y) pairs.
    fn points(&self, samples: usize) -> PyResult<Vec<(f64, f64)>> {
        let grid = UnitGrid::new(samples).map_err(to_py)?;
        Ok(pairs(&geometry::eval_map(&self.inner, &grid)))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner: FourierBoundary::from_json(&v).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("Boundary(N={}, coeffs={:?})", self.inner.truncation(), self.inner.coeffs)
    }
}

/// A converged m-fold V-state.
#[pyclass(name = "VState", from_py_object)]
#[derive(Clone)]
pub struct PyVState {
    inner: VStateSolution,
}

#[pymethods]
impl PyVState {
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn residual_norm(&self) -> f64 {
        self.inner.residual_norm
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    /// Reduced coefficients a_{m−1}, a_{2m−1}, ...
    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.boundary.coeffs.clone()
    }

    fn boundary(&self) -> PyBoundary {
        PyBoundary { inner: self.inner.fourier_boundary() }
    }

    fn dilation_residual(&self, lam: f64, omega_factor: f64) -> PyResult<f64> {
        continuation::dilated_residual(&self.inner, lam, omega_factor).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("VState(alpha={}, m={}, s={}, omega={})", self.inner.alpha, self.inner.m, self.inner.s, self.inner.omega)
    }
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma_fn(x).map_err(to_py)
}

#[pyfunction]
fn zeta(s: f64) -> PyResult<f64> {
    specfun::zeta(s).map_err(to_py)
}

#[pyfunction]
fn c_alpha(alpha: f64) -> PyResult<f64> {
    specfun::c_alpha_const(alpha).map_err(to_py)
}

#[pyfunction]
fn theta_alpha(alpha: f64) -> PyResult<f64> {
    specfun::theta_alpha(alpha).map_err(to_py)
}

#[pyfunction]
fn omega_dispersion(alpha: f64, m: usize) -> PyResult<f64> {
    check_unit(alpha)?;
    if m < 2 {
        return Err(PyValueError::new_err(format!("m must be >= 2, got {m}")));
    }
    Ok(specfun::omega_dispersion(alpha, m))
}

#[pyfunction]
fn omega_asymptotic(alpha: f64, n: usize) -> PyResult<f64> {
    specfun::omega_asymptotic(alpha, n).map_err(to_py)
}

type MomentRow = (String, usize, f64, f64, f64);

/// Rows (family, n, closed form, quadrature, relative error).
#[pyfunction]
fn moment_report(alpha: f64, n_max: usize) -> PyResult<Vec<MomentRow>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(PyValueError::new_err(format!("alpha must lie in (0,1], got {alpha}")));
    }
    Ok(kernels::oracle::moment_report(alpha, n_max)
        .into_iter()
        .map(|r| (r.family.to_string(), r.n, r.closed_form, r.quadrature, r.error))
        .collect())
}

/// Sine coefficients g_0..g_{M/2} of G(Ω, φ) on an M-point grid.
#[pyfunction]
#[pyo3(signature = (omega, boundary, alpha, grid=None))]
fn functional(omega: f64, boundary: &PyBoundary, alpha: f64, grid: Option<usize>) -> PyResult<Vec<f64>> {
    let grid = match grid {
        Some(g) => UnitGrid::new(g).map_err(to_py)?,
        None => UnitGrid::for_truncation(boundary.inner.truncation()),
    };
    Ok(kernels::functional(omega, &boundary.inner, alpha, &grid).map_err(to_py)?.sine_coeffs)
}

#[pyfunction]
fn multiplier_at_disc(alpha: f64, omega: f64, n: usize) -> PyResult<Vec<f64>> {
    Ok(linearization::multiplier_at_disc(alpha, omega, n).map_err(to_py)?.mult)
}

/// Directional derivative sine coefficients of G at `boundary` in direction `direction`.
#[pyfunction]
#[pyo3(signature = (boundary, direction, omega, alpha, grid=None))]
fn gateaux_derivative(boundary: &PyBoundary, direction: &PyBoundary, omega: f64, alpha: f64, grid: Option<usize>) -> PyResult<Vec<f64>> {
    let n = boundary.inner.truncation().max(direction.inner.truncation());
    let grid = match grid {
        Some(g) => UnitGrid::new(g).map_err(to_py)?,
        None => UnitGrid::for_truncation(n),
    };
    let f = linearization::gateaux_derivative(&boundary.inner, &direction.inner, omega, alpha, &grid).map_err(to_py)?;
    Ok(f.sine_coeffs)
}

/// Returns (omega_located, omega_closed_form, gap, kernel_dimension).
#[pyfunction]
fn bifurcation_scan(alpha: f64, m: usize) -> PyResult<(f64, f64, f64, usize)> {
    check_unit(alpha)?;
    if m < 2 {
        return Err(PyValueError::new_err(format!("m must be >= 2, got {m}")));
    }
    let lo = if m > 2 { 0.5 * (specfun::omega_dispersion(alpha, m - 1) + specfun::omega_dispersion(alpha, m)) } else { 0.0 };
    let hi = 0.5 * (specfun::omega_dispersion(alpha, m) + specfun::omega_dispersion(alpha, m + 1));
    let r = linearization::bifurcation_scan(alpha, m, (lo, hi), &UnitGrid::for_truncation((2 * m).max(16))).map_err(to_py)?;
    Ok((r.omega_located, r.omega_closed_form, r.gap, r.kernel_dimension))
}

#[pyfunction]
#[pyo3(signature = (alpha, m, s, modes=16, tol=1e-11))]
fn solve_vstate(alpha: f64, m: usize, s: f64, modes: usize, tol: f64) -> PyResult<PyVState> {
    let opts = SolveOptions { modes, tol, ..SolveOptions::default() };
    Ok(PyVState { inner: continuation::solve_vstate(alpha, m, s, None, &opts).map_err(to_py)? })
}

#[pyfunction]
#[pyo3(signature = (alpha, m, s_max, ds, modes=16))]
fn continue_branch(alpha: f64, m: usize, s_max: f64, ds: f64, modes: usize) -> PyResult<Vec<PyVState>> {
    let opts = SolveOptions { modes, ..SolveOptions::default() };
    let t = continuation::continue_branch(alpha, m, s_max, ds, &opts).map_err(to_py)?;
    Ok(t.solutions.into_iter().map(|inner| PyVState { inner }).collect())
}

/// Evolves boundary nodes by contour dynamics; returns the final nodes.
#[pyfunction]
fn evolve(nodes: Vec<(f64, f64)>, alpha: f64, t: f64, dt: f64) -> PyResult<Vec<(f64, f64)>> {
    let z: Vec<Complex64> = nodes.into_iter().map(|(x, y)| Complex64::new(x, y)).collect();
    let st = ContourState::new(z, alpha).map_err(to_py)?;
    Ok(pairs(&evolution::evolve(&st, t, dt).map_err(to_py)?.nodes))
}

/// Returns (area, centroid_x, centroid_y) of a closed node polygon.
#[pyfunction]
fn diagnostics(nodes: Vec<(f64, f64)>, alpha: f64) -> PyResult<(f64, f64, f64)> {
    let z: Vec<Complex64> = nodes.into_iter().map(|(x, y)| Complex64::new(x, y)).collect();
    let st = ContourState::new(z, alpha).map_err(to_py)?;
    let (a, c) = evolution::conserved_diagnostics(&st);
    Ok((a, c.re, c.im))
}

#[pymodule]
pub fn pyvstates(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBoundary>()?;
    m.add_class::<PyVState>()?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(c_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(theta_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(omega_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(omega_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(moment_report, m)?)?;
    m.add_function(wrap_pyfunction!(functional, m)?)?;
    m.add_function(wrap_pyfunction!(multiplier_at_disc, m)?)?;
    m.add_function(wrap_pyfunction!(gateaux_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(bifurcation_scan, m)?)?;
    m.add_function(wrap_pyfunction!(solve_vstate, m)?)?;
    m.add_function(wrap_pyfunction!(continue_branch, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(diagnostics, m)?)?;
    Ok(())
}
