//! Python bindings: reflectors and their intensity data, the annulus solver
//! and the ray tracer. Arrays cross the boundary as plain lists.

use std::sync::Arc;

use kummer::kummer::{principal_intensities, spectrum_csv, RadialHypersurface};
use kummer::raytrace::{
    compare_bins, farfield_density, focal_concentration, pushforward_probabilities, trace_batch, EqualAreaBins,
    SourceDensity,
};
use kummer::shapes::{Shape, ShapeKind, ShapeSpec};
use kummer::solver::{homotopy_solve, ProblemSpec};
use kummer::sphere::{Dimension, Resolution, ScalarField, SphereGrid};
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: kummer::Error) -> PyErr {
    use kummer::Error as E;
    match e {
        E::UnsupportedDimension(_)
        | E::Resolution(_)
        | E::InvalidShape(_)
        | E::InvalidProblem(_)
        | E::HypothesisViolated(_)
        | E::OutsideDomain(_)
        | E::NonPositiveRadius { .. }
        | E::GridMismatch
        | E::Json(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn grid(n: usize, resolution: Option<usize>) -> PyResult<Arc<SphereGrid>> {
    let res = match Dimension::from_n(n).map_err(to_py)? {
        Dimension::Circle => Resolution::circle(resolution.unwrap_or(512)),
        Dimension::Sphere => Resolution::sphere(resolution.unwrap_or(32)),
    };
    Ok(Arc::new(SphereGrid::new(res).map_err(to_py)?))
}

/// A radial reflector `r = ρx` sampled on a grid of S^1 or S^2.
#[pyclass(name = "Reflector", frozen)]
struct PyReflector {
    inner: RadialHypersurface,
    shape: Option<Shape>,
}

#[pymethods]
impl PyReflector {
    /// Analytic shape: `sphere`, `ellipsoid`, `paraboloid`, `hyperboloid`,
    /// `conic` or `plane`, restricted to the grid points in its domain.
    #[staticmethod]
    #[pyo3(signature = (kind, n = 2, resolution = None, p = 1.0, ecc = None, axis = None))]
    fn shape(
        kind: &str,
        n: usize,
        resolution: Option<usize>,
        p: f64,
        ecc: Option<f64>,
        axis: Option<[f64; 3]>,
    ) -> PyResult<Self> {
        let kind: ShapeKind = parse_kind(kind)?;
        let g = grid(n, resolution)?;
        let spec = ShapeSpec { kind, p, ecc, axis: axis.unwrap_or([0.0, 0.0, 1.0]) };
        let shape = spec.build(g.dimension()).map_err(to_py)?;
        let inner = RadialHypersurface::on_domain(&g, shape.function()).map_err(to_py)?;
        Ok(PyReflector { inner, shape: Some(shape) })
    }

    /// Reflector from point values of ρ on the grid of `(n, resolution)`.
    #[staticmethod]
    fn from_values(n: usize, resolution: usize, values: Vec<f64>) -> PyResult<Self> {
        let g = grid(n, Some(resolution))?;
        let field = ScalarField::new(g, values).map_err(to_py)?;
        let inner = RadialHypersurface::from_field(&field).map_err(to_py)?;
        Ok(PyReflector { inner, shape: None })
    }

    /// Reflector from a field document, as written by `Solution.field_json`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let field = ScalarField::from_json(text).map_err(to_py)?;
        let inner = RadialHypersurface::from_field(&field).map_err(to_py)?;
        Ok(PyReflector { inner, shape: None })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Reflector(S^{}, {} points)", self.inner.dimension().n(), self.inner.len())
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension().n()
    }

    /// Chart coordinates of each point: `[θ]` on S^1, `[colatitude, longitude]` on S^2.
    fn chart_points(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        self.inner.points().iter().map(|p| p.metric.point.u[..n].to_vec()).collect()
    }

    fn directions(&self) -> Vec<[f64; 3]> {
        self.inner.points().iter().map(|p| p.metric.x).collect()
    }

    fn rho(&self) -> Vec<f64> {
        self.inner.rho_values()
    }

    /// Reflected directions `γ(x)`.
    fn reflected(&self) -> Vec<[f64; 3]> {
        self.inner.points().iter().map(|p| p.gamma).collect()
    }

    /// Chart components of κ, `n × n` per point.
    fn kappa(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.dimension();
        self.inner.points().iter().map(|p| (0..n).map(|i| p.kappa.a[i][..n].to_vec()).collect()).collect()
    }

    /// Principal intensities per point, ascending.
    fn principal_intensities(&self) -> Vec<Vec<f64>> {
        principal_intensities(&self.inner).lambdas
    }

    /// `S_1..S_n` per point.
    fn s_functions(&self) -> Vec<Vec<f64>> {
        principal_intensities(&self.inner).s
    }

    /// `S_1` per point.
    fn mean_intensity(&self) -> Vec<f64> {
        self.inner.points().iter().map(|p| p.s1_trace()).collect()
    }

    /// Signed striction distance along the chart direction `v` at point `index`;
    /// `None` when the reflected rays are parallel.
    fn striction(&self, index: usize, v: [f64; 2]) -> PyResult<Option<f64>> {
        if index >= self.inner.len() {
            return Err(PyIndexError::new_err(format!("point {index} out of range")));
        }
        let s = self.inner.point(index).striction(v).map_err(to_py)?;
        Ok(if s.infinite { None } else { Some(s.h) })
    }

    fn spectrum_csv(&self) -> PyResult<String> {
        spectrum_csv(&self.inner).map_err(to_py)
    }
}

fn parse_kind(kind: &str) -> PyResult<ShapeKind> {
    match kind {
        "sphere" => Ok(ShapeKind::Sphere),
        "ellipsoid" => Ok(ShapeKind::Ellipsoid),
        "paraboloid" => Ok(ShapeKind::Paraboloid),
        "hyperboloid" => Ok(ShapeKind::Hyperboloid),
        "conic" => Ok(ShapeKind::Conic),
        "plane" => Ok(ShapeKind::Plane),
        other => Err(PyValueError::new_err(format!("unknown shape '{other}'"))),
    }
}

/// Outcome of a continuation solve.
#[pyclass(name = "Solution", frozen, get_all)]
struct PySolution {
    converged: bool,
    t: f64,
    rho: Vec<f64>,
    residual: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    /// Sup relative error against the exact solution of a manufactured source.
    exact_error: Option<f64>,
    field_json: String,
}

/// Solve `S_1 = n g(x, ρ)` for a problem given as JSON text.
#[pyfunction]
#[pyo3(signature = (problem, resolution = None))]
fn solve(py: Python<'_>, problem: &str, resolution: Option<usize>) -> PyResult<PySolution> {
    let spec = ProblemSpec::from_json(problem).map_err(to_py)?;
    let built = spec.build().map_err(to_py)?;
    let default = if spec.n == 1 { 512 } else { 16 };
    let g = grid(spec.n, Some(resolution.or(spec.resolution).unwrap_or(default)))?;
    let config = spec.solver.clone();
    let state = py.detach(|| homotopy_solve(&built, &config, &g)).map_err(to_py)?;
    let exact_error = built.source().exact_solution().map(|exact| {
        state
            .rho
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| (v / exact.value(&g.ambient(k)) - 1.0).abs())
            .fold(0.0, f64::max)
    });
    Ok(PySolution {
        converged: state.converged(),
        t: state.t,
        residual: state.residual_history.last().map(|r| r.1).unwrap_or(f64::INFINITY),
        accepted_steps: state.accepted_steps,
        rejected_steps: state.rejected_steps,
        exact_error,
        field_json: state.rho.to_json().map_err(to_py)?,
        rho: state.rho.into_values(),
    })
}

/// Far-field histogram of a traced batch with its comparison against the
/// pushforward oracle (closed reflectors only).
#[pyclass(name = "RayTrace", frozen, get_all)]
struct PyRayTrace {
    counts: Vec<u64>,
    density: Vec<f64>,
    expected: Option<Vec<f64>>,
    max_abs_z: Option<f64>,
    p_value: Option<f64>,
    /// Largest distance of a reflected line from the second focus of a conic.
    focal_distance: Option<f64>,
}

#[pyfunction]
#[pyo3(signature = (reflector, rays, seed, bands = 12, sectors = 16))]
fn raytrace(
    py: Python<'_>,
    reflector: &PyReflector,
    rays: usize,
    seed: u64,
    bands: usize,
    sectors: usize,
) -> PyResult<PyRayTrace> {
    let r = &reflector.inner;
    let bins = match r.dimension() {
        Dimension::Circle => EqualAreaBins::circle(sectors),
        Dimension::Sphere => EqualAreaBins::sphere(bands, sectors),
    }
    .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let closed = r.is_closed() && r.support().is_none();
    let density = match (reflector.shape, closed) {
        (Some(Shape::Conic(c)), false) => SourceDensity::function(move |x| if c.in_domain(x) { 1.0 } else { 0.0 }, 1.0),
        (Some(Shape::Plane(p)), false) => SourceDensity::function(move |x| if p.in_domain(x) { 1.0 } else { 0.0 }, 1.0),
        _ => SourceDensity::Uniform,
    };
    let focus = reflector.shape.as_ref().and_then(|s| s.as_conic()).filter(|c| c.second_focus().is_ok()).copied();
    py.detach(|| -> kummer::Result<PyRayTrace> {
        let batch = trace_batch(r, &density, rays, seed)?;
        let hist = farfield_density(&batch, &bins)?;
        let (mut expected, mut max_abs_z, mut p_value) = (None, None, None);
        if closed {
            let e = pushforward_probabilities(r, &density, &bins, 4)?;
            let cmp = compare_bins(&hist, &e)?;
            max_abs_z = Some(cmp.max_abs_z);
            p_value = Some(cmp.p_value);
            expected = Some(e);
        }
        let focal_distance = focus.map(|c| focal_concentration(&c, &batch)).transpose()?;
        Ok(PyRayTrace {
            density: (0..bins.len()).map(|k| hist.density(k)).collect(),
            counts: hist.counts,
            expected,
            max_abs_z,
            p_value,
            focal_distance,
        })
    })
    .map_err(to_py)
}

#[pymodule]
fn kummer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyReflector>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyRayTrace>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(raytrace, m)?)?;
    Ok(())
}
