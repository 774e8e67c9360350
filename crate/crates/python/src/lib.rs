//! Python bindings for `pancake_stack`.
//!
//! Curves cross the boundary as lists of `(x, r)` tuples. Structured
//! results (join metadata, classifications, shooting reports, diagnostics)
//! are returned as plain dicts built from their JSON form.

use pancake_stack::barrier::{self, BarrierCurve};
use pancake_stack::curve::{Point, ProfileGraph};
use pancake_stack::diagnostics;
use pancake_stack::flow::{self, FlowTrace};
use pancake_stack::io::{canonical_json, RunConfig};
use pancake_stack::join::{join, NeckJoinSpec, NeckParam};
use pancake_stack::measure;
use pancake_stack::pancake::{make_pancake, CapStyle, PancakeSpec};
use pancake_stack::presets;
use pancake_stack::shoot::{self, ShootConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

type Curve = Vec<(f64, f64)>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn points(curve: &[Point]) -> Curve {
    curve.iter().map(|p| (p.x, p.r)).collect()
}

fn graph(curve: Curve, closed_ends: (bool, bool)) -> PyResult<ProfileGraph> {
    let nodes = curve.into_iter().map(|(x, r)| Point::new(x, r)).collect();
    ProfileGraph::new(nodes, [closed_ends.0, closed_ends.1]).map_err(value_err)
}

/// Time step and surgery settings of the flow.
#[pyclass(name = "FlowConfig", from_py_object)]
#[derive(Clone)]
struct PyFlowConfig {
    inner: flow::FlowConfig,
}

#[pymethods]
impl PyFlowConfig {
    #[new]
    #[pyo3(signature = (spacing, max_time, n = 3, cfl = 0.8, snapshot_stride = None, pinch_eps = None, tip_eps = None))]
    fn new(
        spacing: f64,
        max_time: f64,
        n: usize,
        cfl: f64,
        snapshot_stride: Option<f64>,
        pinch_eps: Option<f64>,
        tip_eps: Option<f64>,
    ) -> PyResult<Self> {
        let inner = flow::FlowConfig {
            n,
            spacing,
            cfl,
            pinch_eps: pinch_eps.unwrap_or(4.0 * spacing),
            tip_eps: tip_eps.unwrap_or(4.0 * spacing),
            max_time,
            snapshot_stride: snapshot_stride.unwrap_or(max_time / 20.0),
        };
        inner.validate().map_err(value_err)?;
        Ok(PyFlowConfig { inner })
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn __repr__(&self) -> String {
        format!("FlowConfig({})", serde_json::to_string(&self.inner).unwrap_or_default())
    }
}

/// Parameters of one convex pancake of the stack.
#[pyclass(name = "PancakeSpec", from_py_object)]
#[derive(Clone)]
struct PyPancakeSpec {
    inner: PancakeSpec,
}

#[pymethods]
impl PyPancakeSpec {
    /// Pancake at construction time `s` from the asymptotic girth law.
    #[new]
    #[pyo3(signature = (s, n = 3, c_n = 0.0, grim_reaper_caps = false))]
    fn new(s: f64, n: usize, c_n: f64, grim_reaper_caps: bool) -> PyResult<Self> {
        let caps = if grim_reaper_caps { CapStyle::GrimReaper } else { CapStyle::Semicircle };
        let inner = PancakeSpec::at_time(n, s, c_n, caps).map_err(value_err)?;
        Ok(PyPancakeSpec { inner })
    }

    /// The desk-scale pancake: girth 20, width 2 pi, n = 3.
    #[staticmethod]
    fn desk() -> Self {
        PyPancakeSpec { inner: PancakeSpec::desk() }
    }

    #[getter]
    fn girth(&self) -> f64 {
        self.inner.girth_g
    }

    #[getter]
    fn width(&self) -> f64 {
        self.inner.width_w
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    /// Profile of one pancake centred at `center_x`.
    #[pyo3(signature = (spacing, center_x = 0.0))]
    fn profile(&self, spacing: f64, center_x: f64) -> PyResult<Curve> {
        let g = make_pancake(&self.inner, center_x, spacing).map_err(value_err)?;
        Ok(points(g.nodes()))
    }

    fn __repr__(&self) -> String {
        format!(
            "PancakeSpec(s={}, girth={}, width={}, n={})",
            self.inner.s, self.inner.girth_g, self.inner.width_w, self.inner.n
        )
    }
}

/// Result of a flow run.
#[pyclass(name = "Trace", from_py_object)]
#[derive(Clone)]
struct PyTrace {
    inner: FlowTrace,
}

#[pymethods]
impl PyTrace {
    /// Times of the stored states (snapshots plus an off-grid final state).
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.states().iter().map(|s| s.t).collect()
    }

    #[getter]
    fn extinction_time(&self) -> Option<f64> {
        self.inner.extinction_time
    }

    /// Whether the run stopped on a numerical failure.
    #[getter]
    fn blown_up(&self) -> bool {
        self.inner.failure.is_some()
    }

    /// Components of the `k`-th stored state.
    fn state(&self, k: usize) -> PyResult<Vec<Curve>> {
        let states = self.inner.states();
        let s = states
            .get(k)
            .ok_or_else(|| PyValueError::new_err(format!("state index {k} out of range ({})", states.len())))?;
        Ok(s.components.iter().map(|c| points(c.nodes())).collect())
    }

    /// Neck (smallest interior minimum height) of every stored state.
    fn necks(&self) -> Vec<f64> {
        self.inner.states().iter().map(|s| s.neck_value()).collect()
    }

    fn events<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.events)
    }

    fn event_log(&self) -> String {
        self.inner.event_log()
    }

    fn __len__(&self) -> usize {
        self.inner.states().len()
    }
}

/// Semicircle profile of a round sphere.
#[pyfunction]
#[pyo3(signature = (radius, spacing, center = 0.0))]
fn sphere_profile(radius: f64, spacing: f64, center: f64) -> PyResult<Curve> {
    let g = presets::sphere_profile(radius, center, spacing).map_err(value_err)?;
    Ok(points(g.nodes()))
}

/// Two spheres joined by a tangent circular neck arc.
#[pyfunction]
fn dumbbell_profile(sphere_radius: f64, neck: f64, arc_radius: f64, spacing: f64) -> PyResult<Curve> {
    let g = presets::dumbbell_profile(sphere_radius, neck, arc_radius, spacing).map_err(value_err)?;
    Ok(points(g.nodes()))
}

/// Glues two copies of `pancake` with a neck of minimum `m` (or carve
/// height `rho`). Returns the curve and the join metadata.
#[pyfunction]
#[pyo3(signature = (pancake, spacing, m = None, rho = None, gap_half = 1.0))]
fn join_stack<'py>(
    py: Python<'py>,
    pancake: &PyPancakeSpec,
    spacing: f64,
    m: Option<f64>,
    rho: Option<f64>,
    gap_half: f64,
) -> PyResult<(Curve, Bound<'py, PyAny>)> {
    let neck = match (m, rho) {
        (Some(m), None) => NeckParam::M(m),
        (None, Some(r)) => NeckParam::Rho(r),
        _ => return Err(PyValueError::new_err("give exactly one of m and rho")),
    };
    let spec = NeckJoinSpec {
        pancake: pancake.inner.clone(),
        neck,
        gap_half,
    };
    let j = join(&spec, spacing).map_err(value_err)?;
    let meta = serde_json::json!({
        "m_achieved": j.m_achieved,
        "rho": j.rho,
        "arc_center": [j.arc_center.x, j.arc_center.r],
        "arc_radius": j.arc_radius,
        "f_m_domain": j.f_m_domain,
        "tangent_mismatch": j.tangent_mismatch,
    });
    Ok((points(j.curve.nodes()), to_py(py, &meta)?))
}

/// Evolves a profile graph by the axisymmetric flow.
#[pyfunction]
#[pyo3(signature = (curve, config, closed_ends = (true, true)))]
fn evolve(curve: Curve, config: &PyFlowConfig, closed_ends: (bool, bool)) -> PyResult<PyTrace> {
    let g = graph(curve, closed_ends)?;
    let inner = flow::evolve(&g, &config.inner, |_| false).map_err(value_err)?;
    Ok(PyTrace { inner })
}

fn desk_shoot_config(spacing: f64) -> ShootConfig {
    shoot::desk_config(spacing)
}

/// Labels the flow of the stack with neck `m` as `"OneComponent"`,
/// `"TwoComponents"` or `"Undetermined"` at the threshold height.
#[pyfunction]
#[pyo3(signature = (pancake, m, spacing = 0.1))]
fn classify(pancake: &PyPancakeSpec, m: f64, spacing: f64) -> PyResult<String> {
    let c = shoot::classify(&pancake.inner, m, &desk_shoot_config(spacing)).map_err(runtime_err)?;
    Ok(c.label.as_str().to_string())
}

/// Bisects the critical neck and builds the old flow with the desk
/// shooting settings. Returns the report and the recentred trace.
#[pyfunction]
#[pyo3(signature = (pancake, spacing = 0.1))]
fn shoot_old_flow<'py>(
    py: Python<'py>,
    pancake: &PyPancakeSpec,
    spacing: f64,
) -> PyResult<(Bound<'py, PyAny>, Option<PyTrace>)> {
    let r = py
        .detach(|| shoot::build_old_flow_for(&pancake.inner, &desk_shoot_config(spacing)))
        .map_err(runtime_err)?;
    let trace = r.trace().cloned().map(|inner| PyTrace { inner });
    Ok((to_py(py, &r)?, trace))
}

/// Asymptotic half-width of the catenoid with neck radius `c` (n >= 3).
#[pyfunction]
fn catenoid_half_width(n: usize, c: f64) -> PyResult<f64> {
    barrier::catenoid_half_width(n, c).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (n, c, r_max, nodes = 801))]
fn catenoid_profile(n: usize, c: f64, r_max: f64, nodes: usize) -> PyResult<Curve> {
    let cat = barrier::catenoid_profile(n, c, r_max, nodes).map_err(value_err)?;
    Ok(points(&cat.points))
}

/// Shrinking torus profile with its closure and equation residuals.
#[pyfunction]
#[pyo3(signature = (n, nodes = 2000))]
fn torus_shrinker<'py>(py: Python<'py>, n: usize, nodes: usize) -> PyResult<Bound<'py, PyAny>> {
    let t = barrier::torus_shrinker_profile(n, nodes).map_err(runtime_err)?;
    to_py(py, &t)
}

#[pyfunction]
fn shrinking_sphere(r0: f64, n: usize, t: f64) -> PyResult<f64> {
    barrier::shrinking_sphere(r0, n, t).map_err(value_err)
}

#[pyfunction]
fn shrinking_cylinder(u0: f64, n: usize, t: f64) -> PyResult<f64> {
    barrier::shrinking_cylinder(u0, n, t).map_err(value_err)
}

/// Transverse crossings between two profile graphs.
#[pyfunction]
#[pyo3(signature = (a, b, tol = 1e-12))]
fn count_intersections(a: Curve, b: Curve, tol: f64) -> PyResult<usize> {
    let (ga, gb) = (graph(a, (false, false))?, graph(b, (false, false))?);
    measure::count_intersections(&ga, &gb, tol)
        .map(|c| c.crossings)
        .map_err(value_err)
}

/// `(maxima, minima)` of a profile graph.
#[pyfunction]
#[pyo3(signature = (curve, closed_ends = (true, true)))]
fn critical_points(curve: Curve, closed_ends: (bool, bool)) -> PyResult<(usize, usize)> {
    let g = graph(curve, closed_ends)?;
    let cp = measure::count_critical_points(&g, measure::default_plateau_tol(&g));
    Ok((cp.maxima, cp.minima))
}

/// Series report of a trace against barriers given as JSON objects
/// (`{"kind": "sphere", "params": {...}}`) with clipped areas at `c_values`.
#[pyfunction]
#[pyo3(signature = (trace, barriers_json = "[]", c_values = Vec::new()))]
fn diagnose<'py>(
    py: Python<'py>,
    trace: &PyTrace,
    barriers_json: &str,
    c_values: Vec<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let barriers: Vec<BarrierCurve> = serde_json::from_str(barriers_json).map_err(value_err)?;
    let report = diagnostics::extract_series(&trace.inner, &barriers, &c_values);
    to_py(py, &report)
}

/// Canonical JSON of a named preset configuration.
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    presets::preset(name)
        .map(|c| canonical_json(&c))
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name}")))
}

/// Initial curve of a run configuration given as JSON.
#[pyfunction]
fn initial_curve(config_json: &str) -> PyResult<Curve> {
    let cfg = RunConfig::from_json(config_json, "<python>").map_err(value_err)?;
    let init = presets::initial_curve(&cfg, None).map_err(value_err)?;
    Ok(points(init.graph.nodes()))
}

#[pymodule]
pub fn pancake_stack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFlowConfig>()?;
    m.add_class::<PyPancakeSpec>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(sphere_profile, m)?)?;
    m.add_function(wrap_pyfunction!(dumbbell_profile, m)?)?;
    m.add_function(wrap_pyfunction!(join_stack, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(shoot_old_flow, m)?)?;
    m.add_function(wrap_pyfunction!(catenoid_half_width, m)?)?;
    m.add_function(wrap_pyfunction!(catenoid_profile, m)?)?;
    m.add_function(wrap_pyfunction!(torus_shrinker, m)?)?;
    m.add_function(wrap_pyfunction!(shrinking_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(shrinking_cylinder, m)?)?;
    m.add_function(wrap_pyfunction!(count_intersections, m)?)?;
    m.add_function(wrap_pyfunction!(critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(initial_curve, m)?)?;
    Ok(())
}
