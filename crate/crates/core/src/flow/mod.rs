//! Explicit front-tracking evolution of profile curves with neckpinch
//! surgery and extinction handling.

mod surgery;
mod velocity;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{Point, ProfileGraph};
use crate::error::FlowError;
use crate::join::JoinedProfile;
use crate::resample::regrid_points;

pub use surgery::handle_pinch;
pub use velocity::{interior_speed, node_velocities, tip_curvature, velocity};

/// Smallest admissible time step before the run is declared blown up.
pub const DT_FLOOR: f64 = 1e-14;

/// Resample when the shortest chord drops below this fraction of the target.
const SHRINK_TRIGGER: f64 = 0.7;
/// Resample when the longest chord exceeds this multiple of the target.
const STRETCH_TRIGGER: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub n: usize,
    pub spacing: f64,
    pub cfl: f64,
    pub pinch_eps: f64,
    pub tip_eps: f64,
    pub max_time: f64,
    pub snapshot_stride: f64,
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |msg: String| Err(FlowError::Config(msg));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return bad(format!("spacing = {} must be positive", self.spacing));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl = {} must lie in (0, 1)", self.cfl));
        }
        if !(self.pinch_eps >= 4.0 * self.spacing) {
            return bad(format!(
                "pinch_eps = {} must be at least 4 * spacing = {}",
                self.pinch_eps,
                4.0 * self.spacing
            ));
        }
        if !(self.tip_eps >= 4.0 * self.spacing) {
            return bad(format!(
                "tip_eps = {} must be at least 4 * spacing = {}",
                self.tip_eps,
                4.0 * self.spacing
            ));
        }
        if !(self.max_time > 0.0) {
            return bad(format!("max_time = {} must be positive", self.max_time));
        }
        if !(self.snapshot_stride > 0.0) {
            return bad(format!(
                "snapshot_stride = {} must be positive",
                self.snapshot_stride
            ));
        }
        Ok(())
    }

    /// Node spacing used for a component of total length `length`.
    pub fn target_spacing(&self, length: f64) -> f64 {
        self.spacing.min(length / 8.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Running,
    Pinched,
    Extinct,
    BlownUp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub components: Vec<ProfileGraph>,
    pub status: Status,
    /// Set when `status` is `BlownUp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

impl FlowState {
    pub fn new(components: Vec<ProfileGraph>) -> Self {
        FlowState {
            t: 0.0,
            components,
            status: Status::Running,
            failure: None,
        }
    }

    /// Marks the state blown up and returns the matching error event.
    pub(crate) fn blow_up(&mut self, reason: String, component: usize, node: usize) -> FlowEvent {
        let at = self
            .components
            .get(component)
            .and_then(|c| c.nodes().get(node).copied())
            .unwrap_or(Point::new(0.0, 0.0));
        self.status = Status::BlownUp;
        let ev = FlowEvent::error(
            self.t,
            at,
            format!("{reason} (component {component}, node {node})"),
        );
        self.failure = Some(Failure {
            t: self.t,
            reason,
            component,
            node,
        });
        ev
    }

    /// Largest height over all components.
    pub fn max_height(&self) -> f64 {
        self.components
            .iter()
            .map(ProfileGraph::max_height)
            .fold(0.0, f64::max)
    }

    /// Height of the profile over `x = 0`, or 0 when no component covers it.
    pub fn neck_value(&self) -> f64 {
        self.components
            .iter()
            .find_map(|c| c.height_at(0.0))
            .unwrap_or(0.0)
    }

    /// Smallest interior height over all components.
    fn min_interior_height(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.nodes()[1..c.len() - 1].iter().map(|p| p.r))
            .fold(f64::INFINITY, f64::min)
    }

    fn min_chord(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.nodes().windows(2).map(|w| w[0].dist(w[1])))
            .fold(f64::INFINITY, f64::min)
    }

    /// Stable time step for the explicit scheme.
    ///
    /// The diffusion limit is written in arc length (`h^2 / 2n`, `n` being
    /// the tip diffusion coefficient) rather than through `1 + u_x^2`, which
    /// would vanish at the vertical caps.
    pub fn stable_dt(&self, config: &FlowConfig) -> f64 {
        let h = self.min_chord();
        let u = self.min_interior_height();
        config.cfl * (h * h / (2.0 * config.n as f64)).min(u * h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Pinch,
    Split,
    CapExtinct,
    ComponentExtinct,
    Threshold,
    Error,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Pinch => "pinch",
            EventKind::Split => "split",
            EventKind::CapExtinct => "cap-extinct",
            EventKind::ComponentExtinct => "component-extinct",
            EventKind::Threshold => "threshold",
            EventKind::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowEvent {
    pub t: f64,
    pub kind: EventKind,
    pub x: f64,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl FlowEvent {
    pub fn new(t: f64, kind: EventKind, at: Point) -> Self {
        FlowEvent {
            t,
            kind,
            x: at.x,
            r: at.r,
            detail: None,
        }
    }

    pub(crate) fn error(t: f64, at: Point, detail: String) -> Self {
        FlowEvent {
            detail: Some(detail),
            ..FlowEvent::new(t, EventKind::Error, at)
        }
    }
}

impl fmt::Display for FlowEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={:.12e} kind={} x={:.12e} r={:.12e}",
            self.t,
            self.kind.as_str(),
            self.x,
            self.r
        )
    }
}

/// Diagnostic payload of a blown-up run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub t: f64,
    pub reason: String,
    pub component: usize,
    pub node: usize,
}

impl From<&Failure> for FlowError {
    fn from(f: &Failure) -> Self {
        FlowError::BlownUp {
            t: f.t,
            reason: f.reason.clone(),
            component: f.component,
            node: f.node,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub config: FlowConfig,
    pub initial: FlowState,
    /// States at `t0 + k * snapshot_stride`.
    pub snapshots: Vec<FlowState>,
    pub final_state: FlowState,
    pub events: Vec<FlowEvent>,
    pub extinction_time: Option<f64>,
    pub failure: Option<Failure>,
}

impl FlowTrace {
    /// Shifts all times by `-offset`.
    pub fn recentered(mut self, offset: f64) -> Self {
        self.initial.t -= offset;
        self.final_state.t -= offset;
        for s in &mut self.snapshots {
            s.t -= offset;
        }
        for e in &mut self.events {
            e.t -= offset;
        }
        if let Some(w) = &mut self.extinction_time {
            *w -= offset;
        }
        if let Some(f) = &mut self.failure {
            f.t -= offset;
        }
        self
    }

    /// Snapshots followed by the final state when it is off the grid.
    pub fn states(&self) -> Vec<&FlowState> {
        let mut out: Vec<&FlowState> = self.snapshots.iter().collect();
        if out.last().is_none_or(|s| s.t < self.final_state.t) {
            out.push(&self.final_state);
        }
        out
    }

    /// Snapshot at time `t` (within a tiny tolerance).
    pub fn snapshot_at(&self, t: f64) -> Option<&FlowState> {
        let tol = 1e-9 * self.config.snapshot_stride;
        self.states().into_iter().find(|s| (s.t - t).abs() <= tol)
    }

    /// Event log lines `t=<v> kind=<k> x=<v> r=<v>`.
    pub fn event_log(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn first_event(&self, kind: EventKind) -> Option<&FlowEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }
}

/// Initial data accepted by [`evolve`].
pub enum Initial<'a> {
    Graph(&'a ProfileGraph),
    Joined(&'a JoinedProfile),
    State(FlowState),
}

impl<'a> From<&'a ProfileGraph> for Initial<'a> {
    fn from(g: &'a ProfileGraph) -> Self {
        Initial::Graph(g)
    }
}

impl<'a> From<&'a JoinedProfile> for Initial<'a> {
    fn from(j: &'a JoinedProfile) -> Self {
        Initial::Joined(j)
    }
}

impl From<FlowState> for Initial<'_> {
    fn from(s: FlowState) -> Self {
        Initial::State(s)
    }
}

/// Checks every interior node stays above the axis and abscissae stay ordered.
fn find_defect(nodes: &[Point]) -> Option<(usize, &'static str)> {
    let m = nodes.len();
    for i in 0..m {
        let p = nodes[i];
        if !p.x.is_finite() || !p.r.is_finite() {
            return Some((i, "non-finite node"));
        }
        if i > 0 && !(p.x > nodes[i - 1].x) {
            return Some((i, "abscissae no longer increasing"));
        }
        if i > 0 && i + 1 < m && !(p.r > 0.0) {
            return Some((i, "interior height reached the axis"));
        }
    }
    None
}

fn needs_resample(nodes: &[Point], target: f64) -> bool {
    nodes.windows(2).any(|w| {
        let c = w[0].dist(w[1]);
        c < SHRINK_TRIGGER * target || c > STRETCH_TRIGGER * target
    })
}

/// Resamples a component to the configured spacing.
pub(crate) fn regrid(
    graph: &ProfileGraph,
    config: &FlowConfig,
) -> Result<ProfileGraph, crate::error::GeometryError> {
    let target = config.target_spacing(graph.length());
    let pts = regrid_points(graph.nodes(), true, target)?;
    ProfileGraph::new(pts, graph.closed_ends())
}

/// Advances one midpoint step of size at most `dt_cap`.
fn advance(
    state: &FlowState,
    config: &FlowConfig,
    dt_cap: f64,
) -> (FlowState, Vec<FlowEvent>) {
    let mut events = Vec::new();
    let t = state.t;
    let dt = state.stable_dt(config).min(dt_cap);
    let blown = |reason: String, component: usize, node: usize| {
        let mut s = state.clone();
        let ev = s.blow_up(reason, component, node);
        (s, vec![ev])
    };
    if !(dt >= DT_FLOOR) {
        return blown(format!("time step underflow dt = {dt:e}"), 0, 0);
    }

    let mut next = Vec::with_capacity(state.components.len());
    let mut vel = Vec::new();
    let mut mid = Vec::new();
    for (ci, comp) in state.components.iter().enumerate() {
        let nodes = comp.nodes();
        let closed = comp.closed_ends();
        node_velocities(nodes, closed, config.n, &mut vel);
        mid.clear();
        mid.extend(nodes.iter().zip(&vel).map(|(&p, &v)| p + v * (0.5 * dt)));
        if let Some((i, why)) = find_defect(&mid) {
            return blown(why.to_string(), ci, i);
        }
        node_velocities(&mid, closed, config.n, &mut vel);
        let new: Vec<Point> = nodes.iter().zip(&vel).map(|(&p, &v)| p + v * dt).collect();
        if let Some((i, why)) = find_defect(&new) {
            return blown(why.to_string(), ci, i);
        }
        let mut graph = ProfileGraph::from_parts_unchecked(new, closed);
        let target = config.target_spacing(graph.length());
        if needs_resample(graph.nodes(), target) {
        graph = match regrid(&graph, config) {
                Ok(g) => g,
                Err(e) => return blown(format!("resample failed: {e}"), ci, 0),
            };
        }
        next.push(graph);
    }
    let mut out = FlowState {
        t: t + dt,
        components: next,
        status: Status::Running,
        failure: None,
    };
    surgery::remove_small(&mut out, config, &mut events);
    if out.components.is_empty() {
        out.status = Status::Extinct;
    } else if surgery::find_neck(&out, config).is_some() {
        out.status = Status::Pinched;
    }
    (out, events)
}

/// One explicit midpoint step followed by event detection.
///
/// The returned state is `Pinched` when a neck fell below `pinch_eps` (the
/// caller then applies [`handle_pinch`]), `Extinct` when every component
/// vanished, and `BlownUp` on numerical failure.
pub fn step(state: &FlowState, config: &FlowConfig) -> Result<(FlowState, Vec<FlowEvent>), FlowError> {
    if state.status != Status::Running {
        return Err(FlowError::NotRunning);
    }
    Ok(advance(state, config, f64::INFINITY))
}

/// Components must occupy disjoint axis intervals.
fn overlap(state: &FlowState) -> Option<usize> {
    let mut spans: Vec<(f64, f64, usize)> = state
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (a, b) = c.x_range();
            (a, b, i)
        })
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    spans
        .windows(2)
        .find(|w| w[1].0 <= w[0].1)
        .map(|w| w[1].2)
}

/// Evolves until `stop` holds, the status leaves `Running`, or `max_time`
/// (measured from the initial time) is reached.
pub fn evolve<'a>(
    initial: impl Into<Initial<'a>>,
    config: &FlowConfig,
    mut stop: impl FnMut(&FlowState) -> bool,
) -> Result<FlowTrace, FlowError> {
    config.validate()?;
    let state = match initial.into() {
        Initial::Graph(g) => FlowState::new(vec![g.clone()]),
        Initial::Joined(j) => FlowState::new(vec![j.curve.clone()]),
        Initial::State(s) => s,
    };
    for c in &state.components {
        c.check_invariants()?;
    }
    let t0 = state.t;
    let t_end = t0 + config.max_time;
    let mut trace = FlowTrace {
        config: config.clone(),
        initial: state.clone(),
        snapshots: vec![state.clone()],
        final_state: state.clone(),
        events: Vec::new(),
        extinction_time: None,
        failure: None,
    };
    let mut state = state;
    if surgery::find_neck(&state, config).is_some() {
        let (split, events) = handle_pinch(&state, config);
        trace.events.extend(events);
        if split.status == Status::BlownUp {
            trace.failure = split.failure.clone();
        }
        state = split;
    }
    let mut k = 1u64;
    let snap_time = |k: u64| t0 + k as f64 * config.snapshot_stride;

    while !stop(&state) && state.status == Status::Running && state.t < t_end {
        let cap = snap_time(k).min(t_end) - state.t;
        let (mut next, events) = advance(&state, config, cap);
        trace.events.extend(events);
        if next.status == Status::Pinched {
            let (split, events) = handle_pinch(&next, config);
            trace.events.extend(events);
            next = split;
        }
        if next.status == Status::BlownUp {
            trace.failure = next.failure.clone();
            state = next;
            break;
        }
        if next.status == Status::Extinct {
            trace.extinction_time = Some(next.t);
        }
        // Snap to the grid time to avoid drift when the step was clipped.
        let target = snap_time(k);
        if (next.t - target).abs() <= 1e-12 * target.abs().max(1.0) {
            next.t = target;
        }
        if next.t >= target {
            if let Some(ci) = overlap(&next) {
                let ev = next.blow_up("components overlap".into(), ci, 0);
                trace.failure = next.failure.clone();
                trace.events.push(ev);
                state = next;
                break;
            }
            trace.snapshots.push(next.clone());
            k += 1;
        }
        state = next;
    }
    trace.final_state = state;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn semicircle(radius: f64, spacing: f64) -> ProfileGraph {
        let count = (std::f64::consts::PI * radius / spacing).ceil() as usize + 1;
        let mut nodes: Vec<Point> = (0..count)
            .map(|i| {
                let th = std::f64::consts::PI * (1.0 - i as f64 / (count - 1) as f64);
                Point::new(radius * th.cos(), radius * th.sin())
            })
            .collect();
        nodes[0].r = 0.0;
        nodes[count - 1].r = 0.0;
        ProfileGraph::new(nodes, [true, true]).unwrap()
    }

    fn config(spacing: f64) -> FlowConfig {
        FlowConfig {
            n: 3,
            spacing,
            cfl: 0.8,
            pinch_eps: 4.0 * spacing,
            tip_eps: 4.0 * spacing,
            max_time: 1.0,
            snapshot_stride: 0.01,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = config(0.01);
        c.pinch_eps = 0.01;
        assert!(matches!(c.validate(), Err(FlowError::Config(_))));
        let mut c = config(0.01);
        c.cfl = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sphere_extinction_time() {
        let g = semicircle(1.0, 0.01);
        let trace = evolve(&g, &config(0.01), |_| false).unwrap();
        let w = trace.extinction_time.unwrap();
        assert!((w - 1.0 / 6.0).abs() < 0.02 / 6.0, "{w}");
        assert!(trace.first_event(EventKind::ComponentExtinct).is_some());
    }

    #[test]
    fn single_step_keeps_invariants() {
        let g = semicircle(2.0, 0.02);
        let (s, _) = step(&FlowState::new(vec![g]), &config(0.02)).unwrap();
        assert_eq!(s.status, Status::Running);
        s.components[0].check_invariants().unwrap();
    }

    #[test]
    fn snapshots_on_grid() {
        let g = semicircle(1.0, 0.02);
        let mut c = config(0.02);
        c.max_time = 0.05;
        let trace = evolve(&g, &c, |_| false).unwrap();
        let times: Vec<f64> = trace.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 6);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.01 * k as f64).abs() < 1e-15, "{t}");
        }
    }

    #[test]
    fn recentering_shifts_everything() {
        let g = semicircle(1.0, 0.02);
        let mut c = config(0.02);
        c.max_time = 0.03;
        let trace = evolve(&g, &c, |_| false).unwrap().recentered(0.03);
        assert!((trace.final_state.t).abs() < 1e-12);
        assert!((trace.initial.t + 0.03).abs() < 1e-15);
    }
}
