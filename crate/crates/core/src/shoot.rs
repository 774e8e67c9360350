//! Shooting on the neck parameter: one-vs-two-component classification,
//! bisection for the critical neck, and construction of the recentered
//! old-but-not-ancient flows.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{Point, ProfileGraph, Region};
use crate::error::ShootError;
use crate::flow::{evolve, EventKind, FlowConfig, FlowState, FlowTrace, Status};
use crate::join::{join, NeckJoinSpec};
use crate::measure::{clip_curves, count_critical_points, default_plateau_tol, hausdorff_between, HausdorffOutcome};
use crate::pancake::{girth_law, CapStyle, PancakeSpec};

/// Hard cap on bisection steps.
pub const MAX_BISECTIONS: usize = 80;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootConfig {
    pub flow: FlowConfig,
    /// Height `M` whose first attainment defines the threshold time `T_m`.
    pub m_threshold: f64,
    /// Bracket width at which bisection stops.
    pub tol_m: f64,
    /// Margin of `m_bar` above `m_star`.
    pub delta: f64,
    #[serde(default = "one")]
    pub gap_half: f64,
    /// Neck band as multiples of `band_unit`.
    pub band: (f64, f64),
    pub band_unit: f64,
    pub tracking: TrackingConfig,
}

fn one() -> f64 {
    1.0
}

/// Settings for following the critical trajectory past the horizon where
/// the neck instability amplifies a bracket of width `tol_m` to order one.
///
/// The bracket is first narrowed in `m` down to the last representable
/// digits. Whenever the two bracketing flows separate by `restart_gap` in
/// the neck, the open-side flow is restarted from its last snapshot before
/// the separation and the bracket is rebuilt over a neck-localized bump of
/// amplitude `beta`. Each restart is recorded as a correction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingConfig {
    pub enabled: bool,
    pub restart_gap: f64,
    /// Relative bracket width at which a tracking bisection stops.
    pub rel_tol: f64,
    pub max_restarts: usize,
}

impl ShootConfig {
    pub fn validate(&self) -> Result<(), ShootError> {
        self.flow.validate()?;
        let bad = |m: String| Err(ShootError::Setup(m));
        if !(self.m_threshold > 0.0) {
            return bad(format!("m_threshold = {} must be positive", self.m_threshold));
        }
        if !(self.tol_m > 0.0) {
            return bad(format!("tol_m = {} must be positive", self.tol_m));
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta = {} must be positive", self.delta));
        }
        if !(self.gap_half > 0.0) {
            return bad(format!("gap_half = {} must be positive", self.gap_half));
        }
        if !(self.band.0 < self.band.1 && self.band_unit > 0.0) {
            return bad(format!("band {:?} x {} is empty", self.band, self.band_unit));
        }
        if self.tracking.enabled && !(self.tracking.restart_gap > 0.0 && self.tracking.rel_tol > 0.0) {
            return bad("tracking restart_gap and rel_tol must be positive".into());
        }
        Ok(())
    }

    /// Absolute neck band.
    pub fn band_abs(&self) -> (f64, f64) {
        (self.band.0 * self.band_unit, self.band.1 * self.band_unit)
    }

    fn join_spec(&self, pancake: &PancakeSpec, m: f64) -> NeckJoinSpec {
        NeckJoinSpec {
            gap_half: self.gap_half,
            ..NeckJoinSpec::with_m(pancake.clone(), m)
        }
    }
}

/// Construction times with a common pancake family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub s: Vec<f64>,
    pub n: usize,
    pub width_w: f64,
    pub c_n: f64,
    pub cap_style: CapStyle,
}

impl Schedule {
    /// Desk-scale schedule `s in {-5, -10, -20, -40}`.
    pub fn desk() -> Self {
        Schedule {
            s: vec![-5.0, -10.0, -20.0, -40.0],
            n: 3,
            width_w: TAU,
            c_n: 10.0,
            cap_style: CapStyle::Semicircle,
        }
    }

    /// Pancake at the `i`-th construction time, girth from the asymptotic
    /// law without its regime guard.
    pub fn spec(&self, i: usize) -> PancakeSpec {
        let s = self.s[i];
        PancakeSpec {
            n: self.n,
            s,
            width_w: self.width_w,
            girth_g: girth_law(s, self.n, self.c_n),
            c_n: self.c_n,
            cap_style: self.cap_style,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    OneComponent,
    TwoComponents,
    Undetermined,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::OneComponent => "OneComponent",
            Label::TwoComponents => "TwoComponents",
            Label::Undetermined => "Undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub m: f64,
    pub label: Label,
    /// First time the maximal height reaches the threshold, when it did.
    pub t_m: Option<f64>,
    pub pinch_time: Option<f64>,
    pub components: usize,
    #[serde(skip)]
    pub witness: Option<FlowTrace>,
}

/// Evolves `join(s, m)` until the maximal height first drops to the
/// threshold and reports the component count there.
///
/// A pinch before the threshold forces `TwoComponents`; the run is then cut
/// short as soon as the two pieces exist. Blow-up and `max_time` give
/// `Undetermined`.
pub fn classify(pancake: &PancakeSpec, m: f64, config: &ShootConfig) -> Result<Classification, ShootError> {
    let joined = join(&config.join_spec(pancake, m), config.flow.spacing)?;
    let thr = config.m_threshold;
    let trace = evolve(&joined, &config.flow, |s| {
        s.max_height() <= thr || s.components.len() >= 2
    })?;
    let end = &trace.final_state;
    let pinch_time = trace.first_event(EventKind::Pinch).map(|e| e.t);
    let reached = end.status == Status::Running && end.max_height() <= thr;
    let label = if trace.failure.is_some() {
        Label::Undetermined
    } else if pinch_time.is_some() {
        Label::TwoComponents
    } else if reached {
        match end.components.len() {
            1 => Label::OneComponent,
            2 => Label::TwoComponents,
            _ => Label::Undetermined,
        }
    } else {
        Label::Undetermined
    };
    Ok(Classification {
        m,
        label,
        t_m: reached.then_some(end.t),
        pinch_time,
        components: end.components.len(),
        witness: Some(trace),
    })
}

/// A pair of samples whose labels contradict monotonicity in `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    pub m_one: f64,
    pub m_two: f64,
}

/// Every `OneComponent` sample lying below a `TwoComponents` sample.
pub fn anomalies(samples: &[Classification]) -> Vec<Anomaly> {
    let mut out = Vec::new();
    for a in samples.iter().filter(|c| c.label == Label::OneComponent) {
        for b in samples.iter().filter(|c| c.label == Label::TwoComponents) {
            if a.m < b.m {
                out.push(Anomaly { m_one: a.m, m_two: b.m });
            }
        }
    }
    out
}

/// A restart of the tracked critical trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    /// Restart time (before recentering).
    pub t: f64,
    /// Amplitude of the neck bump added to the restarted state.
    pub beta: f64,
    /// Final bracket width in `beta`.
    pub width: f64,
}

/// Assertions on the `t = 0` slice of a recentered old flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub components: usize,
    pub compact: bool,
    pub maxima: usize,
    pub minima: usize,
    pub min_height: f64,
    pub neck: f64,
}

impl SliceReport {
    pub fn of(state: &FlowState) -> Self {
        let (maxima, minima, min_height) = match state.components.as_slice() {
            [c] => {
                let cp = count_critical_points(c, default_plateau_tol(c));
                let mh = cp
                    .locations
                    .iter()
                    .filter(|(_, k)| *k == crate::measure::ExtremumKind::Min)
                    .map(|(x, _)| c.height_at(*x).unwrap_or(0.0))
                    .fold(f64::INFINITY, f64::min);
                (cp.maxima, cp.minima, mh)
            }
            _ => (0, 0, 0.0),
        };
        SliceReport {
            components: state.components.len(),
            compact: state.components.iter().all(|c| c.closed_ends() == [true, true]),
            maxima,
            minima,
            min_height,
            neck: state.neck_value(),
        }
    }

    /// Connected, compact and non-convex with a positive interior minimum.
    pub fn passes(&self) -> bool {
        self.components == 1 && self.compact && self.maxima == 2 && self.minima == 1 && self.min_height > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OldFlow {
    pub m_bar: f64,
    /// Threshold time `T_{m_bar}`, the length of the recentered span.
    pub t_threshold: f64,
    pub corrections: Vec<Correction>,
    pub slice: SliceReport,
    /// Trace with `t = 0` at the threshold time.
    #[serde(skip)]
    pub trace: Option<FlowTrace>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub s: f64,
    pub girth: f64,
    pub samples: Vec<Classification>,
    pub bracket: (f64, f64),
    pub m_star: f64,
    pub m_star_width: f64,
    pub classifications: usize,
    pub anomalies: Vec<Anomaly>,
    pub suspect: bool,
    pub old_flow: Option<OldFlow>,
}

impl ShootResult {
    pub fn trace(&self) -> Option<&FlowTrace> {
        self.old_flow.as_ref().and_then(|o| o.trace.as_ref())
    }
}

/// Bisection on `m` between a two-component and a one-component end.
pub fn bisect(pancake: &PancakeSpec, m_lo: f64, m_hi: f64, config: &ShootConfig) -> Result<ShootResult, ShootError> {
    config.validate()?;
    let mut samples = Vec::new();
    let run = |m: f64, samples: &mut Vec<Classification>| -> Result<Label, ShootError> {
        let mut c = classify(pancake, m, config)?;
        c.witness = None;
        let label = c.label;
        samples.push(c);
        Ok(label)
    };
    let lo_label = run(m_lo, &mut samples)?;
    let hi_label = run(m_hi, &mut samples)?;
    if lo_label != Label::TwoComponents || hi_label != Label::OneComponent {
        return Err(ShootError::InvalidBracket {
            m_lo,
            m_hi,
            lo_label: lo_label.as_str().into(),
            hi_label: hi_label.as_str().into(),
        });
    }
    let (mut lo, mut hi) = (m_lo, m_hi);
    let mut steps = 0;
    while hi - lo >= config.tol_m {
        steps += 1;
        if steps > MAX_BISECTIONS {
            return Err(ShootError::TooManyIterations);
        }
        let mid = 0.5 * (lo + hi);
        match run(mid, &mut samples)? {
            Label::TwoComponents => lo = mid,
            Label::OneComponent => hi = mid,
            Label::Undetermined => return Err(ShootError::Undetermined(mid)),
        }
    }
    let anomalies = anomalies(&samples);
    Ok(ShootResult {
        s: pancake.s,
        girth: pancake.girth_g,
        classifications: samples.len(),
        samples,
        bracket: (lo, hi),
        m_star: 0.5 * (lo + hi),
        m_star_width: hi - lo,
        suspect: !anomalies.is_empty(),
        anomalies,
        old_flow: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Pinch,
    Open,
}

/// A run of the tracking family. `trace` ends where the neck left the band
/// or, when `reached` is set, at the threshold time; in the latter case
/// `side` records where the neck goes after the threshold.
struct Decided {
    side: Side,
    reached: bool,
    trace: FlowTrace,
}

fn exit_side(s: &FlowState, band_lo: f64, open_level: f64) -> Option<Side> {
    let neck = s.neck_value();
    if s.components.len() >= 2 || neck <= band_lo {
        Some(Side::Pinch)
    } else if neck >= open_level {
        Some(Side::Open)
    } else {
        None
    }
}

/// Runs until the neck leaves the band (below: pinch side, above: open
/// side) or the threshold is reached with the neck inside the band. A run
/// that reaches the threshold is continued past it until its neck leaves
/// the band, which decides its side.
fn decide(state: FlowState, config: &ShootConfig) -> Result<Decided, ShootError> {
    let thr = config.m_threshold;
    let (band_lo, open_level) = config.band_abs();
    let trace = evolve(state, &config.flow, |s| {
        s.max_height() <= thr || exit_side(s, band_lo, open_level).is_some()
    })?;
    if let Some(f) = &trace.failure {
        return Err(ShootError::Tracking {
            t: f.t,
            reason: f.reason.clone(),
        });
    }
    let end = &trace.final_state;
    if trace.first_event(EventKind::Pinch).is_some() {
        return Ok(Decided { side: Side::Pinch, reached: false, trace });
    }
    if let Some(side) = exit_side(end, band_lo, open_level) {
        return Ok(Decided { side, reached: false, trace });
    }
    if !(end.max_height() <= thr) {
        return Err(ShootError::Tracking {
            t: end.t,
            reason: format!("undecided after running from t = {} to max_time", trace.initial.t),
        });
    }
    let after = evolve(end.clone(), &config.flow, |s| exit_side(s, band_lo, open_level).is_some())?;
    let last = &after.final_state;
    let side = if after.first_event(EventKind::Pinch).is_some() {
        Side::Pinch
    } else if let Some(side) = exit_side(last, band_lo, open_level) {
        side
    } else if last.neck_value() < end.neck_value() {
        Side::Pinch
    } else {
        Side::Open
    };
    Ok(Decided { side, reached: true, trace })
}

/// Adds `beta * (1 - (x / l)^2)^2` to the heights over `|x| < l`.
fn bump(state: &FlowState, beta: f64, l: f64) -> FlowState {
    let mut out = state.clone();
    for c in &mut out.components {
        let closed = c.closed_ends();
        let m = c.len();
        let nodes: Vec<Point> = c
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let y = p.x / l;
                if j == 0 || j + 1 == m || y.abs() >= 1.0 {
                    *p
                } else {
                    Point::new(p.x, p.r + beta * (1.0 - y * y).powi(2))
                }
            })
            .collect();
        *c = ProfileGraph::new(nodes, closed).expect("small neck bump keeps the graph valid");
    }
    out
}

struct Bracketed {
    lo: (f64, Decided),
    hi: (f64, Decided),
}

/// Bisection of a one-parameter family of states between a pinching and an
/// opening member, down to relative width `rel_tol`.
fn bisect_family(
    family: impl Fn(f64) -> Result<FlowState, ShootError>,
    mut lo: (f64, Decided),
    mut hi: (f64, Decided),
    scale: f64,
    config: &ShootConfig,
) -> Result<Bracketed, ShootError> {
    let tol = config.tracking.rel_tol * scale;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo.0 + hi.0);
        if hi.0 - lo.0 <= tol || mid <= lo.0 || mid >= hi.0 {
            return Ok(Bracketed { lo, hi });
        }
        let d = decide(family(mid)?, config)?;
        match d.side {
            Side::Pinch => lo = (mid, d),
            Side::Open => hi = (mid, d),
        }
    }
    Err(ShootError::TooManyIterations)
}

/// Last common snapshot time up to which the two bracketing flows agree in
/// the neck within `gap`.
fn agreement_time(a: &FlowTrace, b: &FlowTrace, gap: f64) -> f64 {
    let mut last = a.initial.t;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if (sa.t - sb.t).abs() > 1e-9 || (sa.neck_value() - sb.neck_value()).abs() > gap {
            break;
        }
        if sa.components.len() != 1 || sb.components.len() != 1 {
            break;
        }
        last = sa.t;
    }
    last
}

/// Appends the part of `seg` strictly after `from` and up to `to`.
fn append_segment(acc: &mut FlowTrace, seg: &FlowTrace, from: f64, to: f64) {
    acc.snapshots
        .extend(seg.snapshots.iter().filter(|s| s.t > from && s.t <= to).cloned());
    acc.events
        .extend(seg.events.iter().filter(|e| e.t > from && e.t <= to).cloned());
}

/// `m_bar`, the refined bracket, the unshifted trace and the restarts.
type Tracked = (f64, (f64, f64), FlowTrace, Vec<Correction>);

/// Follows the critical trajectory inside the bracket `(m_lo, m_hi)` up to
/// the threshold time.
fn track(
    pancake: &PancakeSpec,
    bracket: (f64, f64),
    config: &ShootConfig,
) -> Result<Tracked, ShootError> {
    let spacing = config.flow.spacing;
    let state_for = |m: f64| -> Result<FlowState, ShootError> {
        let j = join(&config.join_spec(pancake, m), spacing)?;
        Ok(FlowState::new(vec![j.curve]))
    };
    let lo = decide(state_for(bracket.0)?, config)?;
    let hi = decide(state_for(bracket.1)?, config)?;
    if lo.side != Side::Pinch || hi.side != Side::Open {
        return Err(ShootError::Tracking {
            t: 0.0,
            reason: format!("bracket ends decide as {:?} and {:?}", lo.side, hi.side),
        });
    }
    let scale = bracket.1.abs();
    let mut b = bisect_family(state_for, (bracket.0, lo), (bracket.1, hi), scale, config)?;
    let refined = (b.lo.0, b.hi.0);
    let m_bar = b.hi.0;
    let mut acc = FlowTrace {
        snapshots: Vec::new(),
        events: Vec::new(),
        ..b.hi.1.trace.clone()
    };
    acc.snapshots.push(acc.initial.clone());
    let mut corrections = Vec::new();
    let mut from = acc.initial.t;
    loop {
        if b.hi.1.reached {
            let seg = b.hi.1.trace;
            append_segment(&mut acc, &seg, from, f64::INFINITY);
            acc.final_state = seg.final_state;
            return Ok((m_bar, refined, acc, corrections));
        }
        if corrections.len() >= config.tracking.max_restarts {
            return Err(ShootError::Tracking {
                t: from,
                reason: format!("more than {} restarts", config.tracking.max_restarts),
            });
        }
        let t_agree = agreement_time(&b.lo.1.trace, &b.hi.1.trace, config.tracking.restart_gap);
        if t_agree <= from {
            return Err(ShootError::Tracking {
                t: from,
                reason: "bracketing flows separate before the next snapshot".into(),
            });
        }
        append_segment(&mut acc, &b.hi.1.trace, from, t_agree);
        let base = acc.snapshots.last().expect("segment has snapshots").clone();
        from = t_agree;
        let l = config.gap_half;
        let family = |beta: f64| Ok(bump(&base, beta, l));
        let mut eps = config.tracking.restart_gap;
        let (lo, hi) = loop {
            let lo = decide(family(-eps)?, config)?;
            let hi = decide(family(eps)?, config)?;
            if lo.side == Side::Pinch && hi.side == Side::Open {
                break (lo, hi);
            }
            eps *= 2.0;
            if eps > config.band_abs().0 {
                return Err(ShootError::Tracking {
                    t: from,
                    reason: "no neck bump brackets the critical trajectory".into(),
                });
            }
        };
        b = bisect_family(family, (-eps, lo), (eps, hi), l, config)?;
        corrections.push(Correction {
            t: from,
            beta: b.hi.0,
            width: b.hi.0 - b.lo.0,
        });
    }
}

/// Builds the old-but-not-ancient flow for construction time `schedule.s[i]`.
///
/// Bisects to `tol_m`, then (with tracking enabled) follows the critical
/// trajectory to the threshold time so that the neck survives; otherwise
/// uses `m_bar = m_star + delta` directly. The trace is recentered so the
/// threshold time is `t = 0` and the slice there is checked.
pub fn build_old_flow(i: usize, schedule: &Schedule, config: &ShootConfig) -> Result<ShootResult, ShootError> {
    build_old_flow_for(&schedule.spec(i), config)
}

/// [`build_old_flow`] for an explicit pancake, bracketing `m` in `[0.05, 0.9 g]`.
pub fn build_old_flow_for(pancake: &PancakeSpec, config: &ShootConfig) -> Result<ShootResult, ShootError> {
    let pancake = pancake.clone();
    pancake.validate()?;
    let mut result = bisect(&pancake, 0.05, 0.9 * pancake.girth_g, config)?;
    let (m_bar, trace, corrections) = if config.tracking.enabled {
        let (m_bar, refined, trace, corrections) = track(&pancake, result.bracket, config)?;
        result.m_star = 0.5 * (refined.0 + refined.1);
        result.m_star_width = refined.1 - refined.0;
        (m_bar, trace, corrections)
    } else {
        let m_bar = result.m_star + config.delta;
        let c = classify(&pancake, m_bar, config)?;
        if c.label != Label::OneComponent {
            return Err(ShootError::Margin(format!(
                "m_bar = {m_bar} classifies as {}",
                c.label.as_str()
            )));
        }
        (m_bar, c.witness.expect("classify keeps its trace"), Vec::new())
    };
    if m_bar - result.m_star > config.delta {
        return Err(ShootError::Margin(format!(
            "m_bar - m_star = {} exceeds delta = {}",
            m_bar - result.m_star,
            config.delta
        )));
    }
    let t_threshold = trace.final_state.t - trace.initial.t;
    let t_end = trace.final_state.t;
    let trace = trace.recentered(t_end);
    let slice = SliceReport::of(&trace.final_state);
    if !slice.passes() {
        return Err(ShootError::Margin(format!(
            "t = 0 slice at m_bar = {m_bar} is not a connected non-convex profile: {slice:?}"
        )));
    }
    result.old_flow = Some(OldFlow {
        m_bar,
        t_threshold,
        corrections,
        slice,
        trace: Some(trace),
    });
    Ok(result)
}

/// Builds every old flow of the schedule, concurrently over construction
/// times, on at most `threads` workers. Results keep schedule order.
pub fn build_family(
    schedule: &Schedule,
    config: &ShootConfig,
    threads: Option<usize>,
) -> Result<Vec<Result<ShootResult, ShootError>>, ShootError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        pool = pool.num_threads(k.max(1));
    }
    let pool = pool.build().map_err(|e| ShootError::Setup(e.to_string()))?;
    Ok(pool.install(|| {
        (0..schedule.s.len())
            .into_par_iter()
            .map(|i| build_old_flow(i, schedule, config))
            .collect()
    }))
}

/// State of a trace at exactly time `t`, evolving forward from the latest
/// stored state at or before `t`.
pub fn state_at(trace: &FlowTrace, t: f64) -> Option<FlowState> {
    let states = trace.states();
    let base = states.iter().rev().find(|s| s.t <= t + 1e-12)?;
    if (base.t - t).abs() <= 1e-12 {
        return Some((*base).clone());
    }
    let last = states.last()?;
    if t > last.t {
        return None;
    }
    let config = FlowConfig {
        max_time: t - base.t,
        snapshot_stride: t - base.t,
        ..trace.config.clone()
    };
    let out = evolve((*base).clone(), &config, |_| false).ok()?;
    (out.final_state.status != Status::BlownUp).then_some(out.final_state)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub i: usize,
    pub j: usize,
    /// Distance per sample time; `None` when a trace does not cover it or a
    /// slice misses the window.
    pub distances: Vec<Option<f64>>,
    /// Maximum over the available distances.
    pub cauchy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub times: Vec<f64>,
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    /// Cauchy indicators are non-increasing along consecutive pairs.
    pub fn is_non_increasing(&self) -> bool {
        let c: Vec<f64> = self.rows.iter().filter_map(|r| r.cauchy).collect();
        c.len() == self.rows.len() && c.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Hausdorff distances between time-matched slices of consecutive old flows
/// inside an off-axis window.
pub fn convergence_study(results: &[ShootResult], window: &Region, times: &[f64]) -> Result<StudyTable, ShootError> {
    if !(window.r.0 > 0.0) {
        return Err(ShootError::WindowTouchesAxis(window.r.0));
    }
    let slices: Vec<Vec<Option<FlowState>>> = results
        .par_iter()
        .map(|r| {
            times
                .iter()
                .map(|&t| r.trace().and_then(|tr| state_at(tr, t)))
                .collect()
        })
        .collect();
    let rows = (1..results.len())
        .map(|j| {
            let i = j - 1;
            let distances: Vec<Option<f64>> = (0..times.len())
                .map(|k| {
                    let (a, b) = (slices[i][k].as_ref()?, slices[j][k].as_ref()?);
                    let sa = clip_curves(a.components.iter().map(Into::into), window);
                    let sb = clip_curves(b.components.iter().map(Into::into), window);
                    match hausdorff_between(&sa, &sb) {
                        HausdorffOutcome::Distance(d) => Some(d),
                        _ => None,
                    }
                })
                .collect();
            let cauchy = distances.iter().flatten().copied().reduce(f64::max);
            StudyRow { i, j, distances, cauchy }
        })
        .collect();
    Ok(StudyTable {
        times: times.to_vec(),
        rows,
    })
}

/// Existence-time check against an inscribed shrinking sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub r0: f64,
    pub radius: f64,
    /// Elapsed time from the initial slice to the first time the flow lies
    /// in `{r < radius}`.
    pub entry_elapsed: Option<f64>,
    pub bound: f64,
    pub passes: bool,
}

/// Radius of the largest disk centered on the axis inside the region under
/// a closed profile.
pub fn inscribed_radius(curve: &ProfileGraph) -> f64 {
    let nodes = curve.nodes();
    let dist = |xc: f64| {
        let c = Point::new(xc, 0.0);
        nodes
            .windows(2)
            .map(|w| crate::curve::point_segment_distance(c, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (0.0f64, nodes[0].x);
    for p in nodes {
        let d = dist(p.x);
        if d > best.0 {
            best = (d, p.x);
        }
    }
    // Local refinement by golden-section search around the best node.
    let h = nodes.windows(2).map(|w| w[1].x - w[0].x).fold(0.0, f64::max);
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if dist(c) > dist(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.0.max(dist(0.5 * (a + b)))
}

/// Continues the old flow past `t = 0` until it lies inside `{r < r0 / 2}`
/// and compares the elapsed time with the inscribed-sphere bound
/// `(r0^2 - R^2) / 2n` (with 5% slack).
pub fn existence_time_check(result: &ShootResult, config: &ShootConfig) -> Result<ExistenceReport, ShootError> {
    let old = result
        .old_flow
        .as_ref()
        .ok_or_else(|| ShootError::Setup("no old flow built".into()))?;
    let trace = old.trace.as_ref().ok_or_else(|| ShootError::Setup("old flow trace dropped".into()))?;
    let initial = &trace.initial.components[0];
    let r0 = inscribed_radius(initial);
    let radius = 0.5 * r0;
    let n = config.flow.n as f64;
    let bound = (r0 * r0 - radius * radius) / (2.0 * n);
    let mut entry = trace.states().into_iter().find(|s| s.max_height() < radius).map(|s| s.t);
    if entry.is_none() {
        // The flow is extinct once an enclosing sphere is, so running that
        // long always reaches the cylinder.
        let last = &trace.final_state;
        let (x0, x1) = last
            .components
            .iter()
            .map(|c| c.x_range())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
        let center = Point::new(0.5 * (x0 + x1), 0.0);
        let enclosing = last
            .components
            .iter()
            .flat_map(|c| c.nodes().iter().map(|p| p.dist(center)))
            .fold(0.0, f64::max);
        let horizon = (10.0 * bound + 1.0).max(1.05 * enclosing * enclosing / (2.0 * n));
        let flow = FlowConfig {
            max_time: horizon,
            snapshot_stride: horizon,
            ..config.flow.clone()
        };
        let cont = evolve(trace.final_state.clone(), &flow, |s| s.max_height() < radius)?;
        let end = &cont.final_state;
        if end.max_height() < radius {
            entry = Some(end.t);
        }
    }
    let entry_elapsed = entry.map(|t| t - trace.initial.t);
    Ok(ExistenceReport {
        r0,
        radius,
        entry_elapsed,
        bound,
        passes: entry_elapsed.is_some_and(|e| e >= 0.95 * bound),
    })
}

/// Desk-scale shooting configuration at node spacing `spacing`.
pub fn desk_config(spacing: f64) -> ShootConfig {
    ShootConfig {
        flow: FlowConfig {
            n: 3,
            spacing,
            cfl: 0.8,
            pinch_eps: 4.0 * spacing,
            tip_eps: 4.0 * spacing,
            max_time: 400.0,
            snapshot_stride: 0.25,
        },
        m_threshold: 2.0 * TAU,
        tol_m: 1e-3 * 20.0,
        delta: 4e-3 * 20.0,
        gap_half: 1.0,
        band: (0.4, 1.1),
        band_unit: 1.25,
        tracking: TrackingConfig {
            enabled: true,
            restart_gap: 0.02,
            rel_tol: 1e-13,
            max_restarts: 64,
        },
    }
}
