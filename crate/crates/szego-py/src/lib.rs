//! Python bindings: symbols, test functions, regions, boundary
//! coefficients, spectral traces, and the sweep / entanglement-entropy /
//! scaling-limit drivers, mirroring the Rust API and the CLI names.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use szego::coeffs::{self, QuadratureSpec};
use szego::geometry;
use szego::harness;
use szego::operators;
use szego::symbols::{self, FermiParams};
use szego::testfuncs;

fn err(e: szego::Error) -> PyErr {
    match &e {
        szego::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn make_quad(eps_min: Option<f64>, xi_cutoff: Option<f64>) -> PyResult<QuadratureSpec> {
    let mut q = QuadratureSpec::default();
    if let Some(e) = eps_min {
        q = q.with_eps_min(e);
    }
    if let Some(x) = xi_cutoff {
        q.xi_cutoff = x;
    }
    q.validate().map_err(err)?;
    Ok(q)
}

/// Fourier multiplier symbol a(xi).
#[pyclass(name = "Symbol", module = "szego_py", skip_from_py_object)]
#[derive(Clone)]
struct PySymbol {
    inner: symbols::Symbol,
}

#[pymethods]
impl PySymbol {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn sup_norm_bound(&self) -> f64 {
        self.inner.sup_norm_bound
    }

    fn __call__(&self, xi: Vec<f64>) -> PyResult<f64> {
        if xi.len() != self.inner.dim {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.inner.dim,
                xi.len()
            )));
        }
        Ok(self.inner.eval(&xi))
    }

    /// Pointwise rescaling c * a.
    fn scaled(&self, c: f64) -> PySymbol {
        PySymbol {
            inner: self.inner.scaled(c),
        }
    }

    /// Linear interpolation toward `other`: a + lam * (other - a).
    fn interpolate(&self, other: &PySymbol, lam: f64) -> PyResult<PySymbol> {
        Ok(PySymbol {
            inner: symbols::symbol_family_interpolate(&self.inner, &other.inner, lam)
                .map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Symbol(dim={})", self.inner.dim)
    }
}

/// Scalar test function f applied spectrally to the operator.
#[pyclass(name = "TestFunction", module = "szego_py", skip_from_py_object)]
#[derive(Clone)]
struct PyTestFunction {
    inner: testfuncs::TestFunction,
}

#[pymethods]
impl PyTestFunction {
    fn __call__(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    /// Effective Hoelder exponent min(gamma, 1).
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    /// The same function with f(0) subtracted.
    fn shifted_to_zero(&self) -> PyTestFunction {
        PyTestFunction {
            inner: self.inner.shifted_to_zero(),
        }
    }
}

/// Spatial truncation region (d = 1 or 2).
#[pyclass(name = "Region", module = "szego_py", skip_from_py_object)]
#[derive(Clone)]
struct PyRegion {
    inner: geometry::Region,
}

#[pymethods]
impl PyRegion {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    fn contains(&self, x: Vec<f64>) -> bool {
        self.inner.indicator(&x)
    }

    fn measure(&self) -> f64 {
        self.inner.measure()
    }

    /// The box (-l, l)^d minus this region.
    fn complement_in_box(&self, l: f64) -> PyResult<PyRegion> {
        Ok(PyRegion {
            inner: self.inner.complement_in_box(l).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Region(dim={})", self.inner.dim)
    }
}

/// Boundary coefficient with its error budget.
#[pyclass(name = "CoefficientResult", module = "szego_py", skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyCoefficientResult {
    #[pyo3(get)]
    value: f64,
    #[pyo3(get)]
    pv_error: f64,
    #[pyo3(get)]
    tail_error: f64,
    #[pyo3(get)]
    nodes: usize,
}

#[pymethods]
impl PyCoefficientResult {
    fn __repr__(&self) -> String {
        format!(
            "CoefficientResult(value={}, pv_error={}, tail_error={}, nodes={})",
            self.value, self.pv_error, self.tail_error, self.nodes
        )
    }
}

impl From<coeffs::CoefficientResult> for PyCoefficientResult {
    fn from(c: coeffs::CoefficientResult) -> Self {
        PyCoefficientResult {
            value: c.value,
            pv_error: c.pv_extrapolation_error,
            tail_error: c.tail_error,
            nodes: c.nodes_used,
        }
    }
}

/// Spectral trace deficit at one alpha.
#[pyclass(name = "SpectralTrace", module = "szego_py", skip_from_py_object)]
#[derive(Clone, Copy)]
struct PySpectralTrace {
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    n: usize,
    #[pyo3(get)]
    trace_f: f64,
    #[pyo3(get)]
    trace_smoothed: f64,
    #[pyo3(get)]
    d_alpha: f64,
    #[pyo3(get)]
    resolution_estimate: f64,
}

#[pymethods]
impl PySpectralTrace {
    fn __repr__(&self) -> String {
        format!(
            "SpectralTrace(alpha={}, n={}, d_alpha={}, resolution_estimate={})",
            self.alpha, self.n, self.d_alpha, self.resolution_estimate
        )
    }
}

/// Alpha sweep of the deficit against the coefficient prediction.
#[pyclass(name = "SweepReport", module = "szego_py")]
struct PySweepReport {
    inner: harness::SweepReport,
}

#[pymethods]
impl PySweepReport {
    /// Rows as (alpha, d_alpha, predicted, ratio) tuples.
    #[getter]
    fn rows(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.alpha, r.d_alpha, r.predicted, r.ratio))
            .collect()
    }

    #[getter]
    fn skipped(&self) -> Vec<(f64, String)> {
        self.inner.skipped.clone()
    }

    #[getter]
    fn fitted_slope(&self) -> f64 {
        self.inner.fitted_slope
    }

    #[getter]
    fn coefficient(&self) -> PyCoefficientResult {
        self.inner.coefficient.into()
    }

    fn csv(&self) -> String {
        harness::CsvReport::csv(&self.inner)
    }
}

/// Entanglement-entropy scaling rows.
#[pyclass(name = "EEReport", module = "szego_py")]
struct PyEEReport {
    inner: harness::EEReport,
}

#[pymethods]
impl PyEEReport {
    /// Rows as (alpha, h_gamma, predicted) tuples.
    #[getter]
    fn rows(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.alpha, r.h_gamma, r.predicted))
            .collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn box_half_width(&self) -> f64 {
        self.inner.box_half_width
    }

    #[getter]
    fn coefficient(&self) -> PyCoefficientResult {
        self.inner.coefficient.into()
    }

    fn csv(&self) -> String {
        harness::CsvReport::csv(&self.inner)
    }
}

/// Scaling-limit deviations per lambda.
#[pyclass(name = "ScalingReport", module = "szego_py")]
struct PyScalingReport {
    inner: harness::ScalingReport,
}

#[pymethods]
impl PyScalingReport {
    /// Rows as (lambda, scaled_value, target, deviation) tuples.
    #[getter]
    fn rows(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.lambda, r.scaled_value, r.target, r.deviation))
            .collect()
    }

    fn csv(&self) -> String {
        harness::CsvReport::csv(&self.inner)
    }
}

/// Build a symbol by CLI name: "gaussian" or "fermi" (h = |xi|^2).
#[pyfunction]
#[pyo3(signature = (name, dim=1, temperature=1.0, mu=1.0))]
fn symbol(name: &str, dim: usize, temperature: f64, mu: f64) -> PyResult<PySymbol> {
    let inner = match name {
        "gaussian" => symbols::gaussian_symbol(dim).map_err(err)?,
        "fermi" => {
            symbols::fermi_symbol(&FermiParams::xi_squared(temperature, mu, dim)).map_err(err)?
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown symbol '{other}'; expected gaussian | fermi"
            )))
        }
    };
    Ok(PySymbol { inner })
}

/// Build a test function by CLI name: poly:p | renyi:gamma | abs:gamma | tlog.
#[pyfunction]
fn test_function(name: &str) -> PyResult<PyTestFunction> {
    Ok(PyTestFunction {
        inner: testfuncs::parse_test_function(name).map_err(err)?,
    })
}

/// Parse a region: interval:a,b | halfline | disk:R | polygon:x1,y1;...
#[pyfunction]
#[pyo3(signature = (text, complement_box=None))]
fn region(text: &str, complement_box: Option<f64>) -> PyResult<PyRegion> {
    let r = geometry::parse_region(text).map_err(err)?;
    let inner = match complement_box {
        Some(l) => r.complement_in_box(l).map_err(err)?,
        None => r,
    };
    Ok(PyRegion { inner })
}

/// Two-point deviation-from-linearity functional U(s1, s2; f).
#[pyfunction]
fn u_functional(s1: f64, s2: f64, f: &PyTestFunction) -> PyResult<f64> {
    coeffs::u_functional(s1, s2, &f.inner).map_err(err)
}

/// Half-line edge coefficient in d = 1.
#[pyfunction]
#[pyo3(signature = (a, f, eps_min=None, xi_cutoff=None))]
fn b1_coefficient(
    a: &PySymbol,
    f: &PyTestFunction,
    eps_min: Option<f64>,
    xi_cutoff: Option<f64>,
) -> PyResult<PyCoefficientResult> {
    let q = make_quad(eps_min, xi_cutoff)?;
    Ok(coeffs::b1_coefficient(&a.inner, &f.inner, &q)
        .map_err(err)?
        .into())
}

/// Directed half-plane coefficient in d = 2.
#[pyfunction]
#[pyo3(signature = (a, direction, f, eps_min=None, xi_cutoff=None))]
fn a_d_coefficient(
    a: &PySymbol,
    direction: (f64, f64),
    f: &PyTestFunction,
    eps_min: Option<f64>,
    xi_cutoff: Option<f64>,
) -> PyResult<PyCoefficientResult> {
    let q = make_quad(eps_min, xi_cutoff)?;
    Ok(
        coeffs::a_d_coefficient(&a.inner, [direction.0, direction.1], &f.inner, &q)
            .map_err(err)?
            .into(),
    )
}

/// Boundary-integrated coefficient over a region (unit weight).
#[pyfunction]
#[pyo3(signature = (a, region, f, eps_min=None, xi_cutoff=None))]
fn b_d_coefficient(
    a: &PySymbol,
    region: &PyRegion,
    f: &PyTestFunction,
    eps_min: Option<f64>,
    xi_cutoff: Option<f64>,
) -> PyResult<PyCoefficientResult> {
    let q = make_quad(eps_min, xi_cutoff)?;
    let one = |_x: [f64; 2]| 1.0;
    Ok(
        coeffs::b_d_coefficient(&a.inner, &one, &region.inner, &f.inner, &q)
            .map_err(err)?
            .into(),
    )
}

/// Eigenvalues of the truncated operator, descending.
#[pyfunction]
fn spectrum(a: &PySymbol, region: &PyRegion, alpha: f64, grid_density: f64) -> PyResult<Vec<f64>> {
    let op = operators::build_operator(&a.inner, &region.inner, alpha, grid_density).map_err(err)?;
    operators::spectrum(&op).map_err(err)
}

/// Spectral trace deficit tr[f(W) - W(f o a)] at one alpha.
#[pyfunction]
#[pyo3(signature = (a, f, region, alpha, grid_density, refine_check=false))]
fn d_alpha_trace(
    a: &PySymbol,
    f: &PyTestFunction,
    region: &PyRegion,
    alpha: f64,
    grid_density: f64,
    refine_check: bool,
) -> PyResult<PySpectralTrace> {
    let t = operators::d_alpha_trace(
        &a.inner,
        &f.inner,
        &region.inner,
        alpha,
        grid_density,
        refine_check,
    )
    .map_err(err)?;
    Ok(PySpectralTrace {
        alpha: t.alpha,
        n: t.n,
        trace_f: t.trace_f,
        trace_smoothed: t.trace_smoothed,
        d_alpha: t.d_alpha,
        resolution_estimate: t.resolution_estimate,
    })
}

/// Alpha sweep of the deficit against alpha^(d-1) * B_d.
#[pyfunction]
#[pyo3(signature = (a, f, region, alphas, grid_density, eps_min=None, xi_cutoff=None))]
fn szego_sweep(
    a: &PySymbol,
    f: &PyTestFunction,
    region: &PyRegion,
    alphas: Vec<f64>,
    grid_density: f64,
    eps_min: Option<f64>,
    xi_cutoff: Option<f64>,
) -> PyResult<PySweepReport> {
    let q = make_quad(eps_min, xi_cutoff)?;
    Ok(PySweepReport {
        inner: harness::szego_sweep(&a.inner, &f.inner, &region.inner, &alphas, grid_density, &q)
            .map_err(err)?,
    })
}

/// Entanglement-entropy scaling for the thermal Fermi state.
#[pyfunction]
#[pyo3(signature = (temperature, mu, gamma, region, alphas, box_half_width, grid_density, eps_min=None, xi_cutoff=None))]
#[allow(clippy::too_many_arguments)]
fn ee_scaling(
    temperature: f64,
    mu: f64,
    gamma: f64,
    region: &PyRegion,
    alphas: Vec<f64>,
    box_half_width: f64,
    grid_density: f64,
    eps_min: Option<f64>,
    xi_cutoff: Option<f64>,
) -> PyResult<PyEEReport> {
    let q = make_quad(eps_min, xi_cutoff)?;
    let p = FermiParams::xi_squared(temperature, mu, region.inner.dim);
    Ok(PyEEReport {
        inner: harness::ee_scaling(
            &p,
            gamma,
            &region.inner,
            &alphas,
            box_half_width,
            grid_density,
            &q,
        )
        .map_err(err)?,
    })
}

/// Coefficient-level scaling-limit check for the family a0 + lam (a1 - a0).
#[pyfunction]
#[pyo3(signature = (a0, a1, f, f_model, gamma, lambdas, region, eps_min=None, xi_cutoff=None))]
#[allow(clippy::too_many_arguments)]
fn scaling_limit_check(
    a0: &PySymbol,
    a1: &PySymbol,
    f: &PyTestFunction,
    f_model: &PyTestFunction,
    gamma: f64,
    lambdas: Vec<f64>,
    region: &PyRegion,
    eps_min: Option<f64>,
    xi_cutoff: Option<f64>,
) -> PyResult<PyScalingReport> {
    let q = make_quad(eps_min, xi_cutoff)?;
    Ok(PyScalingReport {
        inner: harness::scaling_limit_check(
            &a0.inner,
            &a1.inner,
            &f.inner,
            &f_model.inner,
            gamma,
            &lambdas,
            &region.inner,
            &q,
        )
        .map_err(err)?,
    })
}

#[pymodule]
fn szego_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymbol>()?;
    m.add_class::<PyTestFunction>()?;
    m.add_class::<PyRegion>()?;
    m.add_class::<PyCoefficientResult>()?;
    m.add_class::<PySpectralTrace>()?;
    m.add_class::<PySweepReport>()?;
    m.add_class::<PyEEReport>()?;
    m.add_class::<PyScalingReport>()?;
    m.add_function(wrap_pyfunction!(symbol, m)?)?;
    m.add_function(wrap_pyfunction!(test_function, m)?)?;
    m.add_function(wrap_pyfunction!(region, m)?)?;
    m.add_function(wrap_pyfunction!(u_functional, m)?)?;
    m.add_function(wrap_pyfunction!(b1_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(a_d_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(b_d_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(d_alpha_trace, m)?)?;
    m.add_function(wrap_pyfunction!(szego_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(ee_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_limit_check, m)?)?;
    Ok(())
}
