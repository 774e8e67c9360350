//! Topology changes: neckpinch splitting, thin-tail removal and extinction
//! of small components.

use std::f64::consts::FRAC_PI_2;

use super::{regrid, EventKind, FlowConfig, FlowEvent, FlowState, Status};
use crate::curve::{Point, ProfileGraph};

/// Minimum nodes inside the excised window for the neck to count as resolved.
const NECK_NODES: usize = 4;

/// Deepest interior local minimum below `pinch_eps`, as (component, node).
pub(super) fn find_neck(state: &FlowState, config: &FlowConfig) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (ci, comp) in state.components.iter().enumerate() {
        let p = comp.nodes();
        for j in 1..p.len() - 1 {
            let u = p[j].r;
            if u < config.pinch_eps
                && u <= p[j - 1].r
                && u <= p[j + 1].r
                && best.is_none_or(|b| u < b.2)
            {
                best = Some((ci, j, u));
            }
        }
    }
    best.map(|(c, j, _)| (c, j))
}

/// Quarter ellipse from `cut` down to the axis, bulging towards `dir`
/// (`+1` caps a left piece on its right, `-1` a right piece on its left).
/// Excludes `cut` itself; the last point lies on the axis.
fn ellipse_cap(cut: Point, half_width: f64, dir: f64, spacing: f64) -> Vec<Point> {
    let arc = FRAC_PI_2 * 0.5 * (half_width + cut.r);
    let k = ((arc / spacing).ceil() as usize).max(4);
    (1..=k)
        .map(|i| {
            let phi = FRAC_PI_2 * i as f64 / k as f64;
            let r = if i == k { 0.0 } else { cut.r * phi.cos() };
            Point::new(cut.x + dir * half_width * phi.sin(), r)
        })
        .collect()
}

/// Left piece `nodes[x < cut.x]` closed off on the right at `cut`.
fn cap_on_right(nodes: &[Point], cut: Point, b: f64, spacing: f64) -> Vec<Point> {
    let mut out: Vec<Point> = nodes
        .iter()
        .copied()
        .take_while(|p| p.x < cut.x - 1e-3 * spacing)
        .collect();
    out.push(cut);
    out.extend(ellipse_cap(cut, b, 1.0, spacing));
    out
}

/// Right piece `nodes[x > cut.x]` closed off on the left at `cut`.
fn cap_on_left(nodes: &[Point], cut: Point, b: f64, spacing: f64) -> Vec<Point> {
    let mut out: Vec<Point> = ellipse_cap(cut, b, -1.0, spacing);
    out.reverse();
    out.push(cut);
    out.extend(nodes.iter().copied().skip_while(|p| p.x <= cut.x + 1e-3 * spacing));
    out
}

enum Split {
    Done(Vec<ProfileGraph>, Vec<FlowEvent>),
    Unresolved,
    Failed(String),
}

fn split_component(comp: &ProfileGraph, j: usize, t: f64, config: &FlowConfig) -> Split {
    let eps = config.pinch_eps;
    let nodes = comp.nodes();
    let neck = nodes[j];
    let (x0, x1) = comp.x_range();
    let lo = neck.x - eps;
    let hi = neck.x + eps;
    let inside = nodes.iter().filter(|p| p.x >= lo && p.x <= hi).count();
    if inside < NECK_NODES {
        return Split::Unresolved;
    }
    let closed = comp.closed_ends();
    let b = 0.5 * eps;
    let h = config.spacing;
    let mut events = vec![FlowEvent::new(t, EventKind::Pinch, neck)];
    let mut pieces = Vec::new();
    let mut build = |pts: Vec<Point>, ends: [bool; 2]| -> Result<(), String> {
        let g = ProfileGraph::new(pts, ends).map_err(|e| e.to_string())?;
        pieces.push(regrid(&g, config).map_err(|e| e.to_string())?);
        Ok(())
    };
    // A side is kept only if it extends beyond the excised window by more
    // than a cap width; otherwise the pinch swallows it.
    if lo - x0 > 2.0 * eps {
        let cut = Point::new(lo, comp.height_at(lo).unwrap());
        if let Err(e) = build(cap_on_right(nodes, cut, b, h), [closed[0], true]) {
            return Split::Failed(e);
        }
    } else {
        events.push(FlowEvent::new(t, EventKind::CapExtinct, Point::new(x0, 0.0)));
    }
    if x1 - hi > 2.0 * eps {
        let cut = Point::new(hi, comp.height_at(hi).unwrap());
        if let Err(e) = build(cap_on_left(nodes, cut, b, h), [true, closed[1]]) {
            return Split::Failed(e);
        }
    } else {
        events.push(FlowEvent::new(t, EventKind::CapExtinct, Point::new(x1, 0.0)));
    }
    events.push(FlowEvent::new(t, EventKind::Split, Point::new(neck.x, 0.0)));
    Split::Done(pieces, events)
}

/// Splits every neck below `pinch_eps`, capping both sides off at the axis.
///
/// Logs a pinch event and then a split event per neck. A neck with fewer
/// than four nodes in the excised window is refined once; if it is still
/// unresolved the state is marked blown up.
pub fn handle_pinch(state: &FlowState, config: &FlowConfig) -> (FlowState, Vec<FlowEvent>) {
    let mut out = state.clone();
    let mut events = Vec::new();
    let mut refined = false;
    out.status = Status::Running;
    while let Some((ci, j)) = find_neck(&out, config) {
        match split_component(&out.components[ci], j, out.t, config) {
            Split::Done(pieces, evs) => {
                out.components.splice(ci..=ci, pieces);
                events.extend(evs);
                refined = false;
            }
            Split::Unresolved if !refined => {
                let fine = FlowConfig {
                    spacing: 0.5 * config.spacing,
                    ..config.clone()
                };
                match regrid(&out.components[ci], &fine) {
                    Ok(g) => out.components[ci] = g,
                    Err(e) => return fail(out, events, ci, j, format!("refinement failed: {e}")),
                }
                refined = true;
            }
            Split::Unresolved => {
                return fail(out, events, ci, j, "neck not resolvable on the grid".into());
            }
            Split::Failed(e) => return fail(out, events, ci, j, format!("surgery failed: {e}")),
        }
    }
    remove_small(&mut out, config, &mut events);
    if out.components.is_empty() {
        out.status = Status::Extinct;
    }
    (out, events)
}

fn fail(
    mut state: FlowState,
    mut events: Vec<FlowEvent>,
    component: usize,
    node: usize,
    reason: String,
) -> (FlowState, Vec<FlowEvent>) {
    events.push(state.blow_up(reason, component, node));
    (state, events)
}

/// Removes thin tails at axis ends and components below the resolution.
pub(super) fn remove_small(state: &mut FlowState, config: &FlowConfig, events: &mut Vec<FlowEvent>) {
    let t = state.t;
    let eps = config.pinch_eps;
    let mut kept = Vec::with_capacity(state.components.len());
    for comp in state.components.drain(..) {
        let (x0, x1) = comp.x_range();
        let top = comp.max_height();
        let diameter = (x1 - x0).max(2.0 * top);
        if diameter < config.tip_eps || top < eps {
            events.push(FlowEvent::new(
                t,
                EventKind::ComponentExtinct,
                Point::new(0.5 * (x0 + x1), 0.0),
            ));
            continue;
        }
        kept.push(trim_tails(comp, config, t, events));
    }
    state.components = kept;
}

/// Cuts a run of heights below `pinch_eps` longer than `2 pinch_eps` off an
/// axis end and recaps the remainder.
fn trim_tails(
    comp: ProfileGraph,
    config: &FlowConfig,
    t: f64,
    events: &mut Vec<FlowEvent>,
) -> ProfileGraph {
    let eps = config.pinch_eps;
    let b = 0.5 * eps;
    let h = config.spacing;
    let mut comp = comp;
    for side in 0..2 {
        let closed = comp.closed_ends();
        if !closed[side] {
            continue;
        }
        let nodes = comp.nodes();
        let m = nodes.len();
        let k = if side == 0 {
            match (1..m).find(|&i| nodes[i].r >= eps) {
                Some(k) => k,
                None => continue,
            }
        } else {
            match (0..m - 1).rev().find(|&i| nodes[i].r >= eps) {
                Some(k) => k,
                None => continue,
            }
        };
        let tail = if side == 0 {
            nodes[k].x - nodes[0].x
        } else {
            nodes[m - 1].x - nodes[k].x
        };
        if tail <= 2.0 * eps + b {
            continue;
        }
        let cut = nodes[k];
        let pts = if side == 0 {
            cap_on_left(nodes, cut, b, h)
        } else {
            cap_on_right(nodes, cut, b, h)
        };
        let tip = if side == 0 { nodes[0] } else { nodes[m - 1] };
        let rebuilt = ProfileGraph::new(pts, closed).and_then(|g| regrid(&g, config));
        if let Ok(g) = rebuilt {
            events.push(FlowEvent::new(t, EventKind::CapExtinct, tip));
            comp = g;
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::enclosed_area_above;

    fn dumbbell_like(neck: f64) -> ProfileGraph {
        // Two bumps joined by a shallow neck of height `neck` at x = 0.
        let f = |x: f64| {
            let s = (std::f64::consts::PI * (x + 3.0) / 6.0).sin().max(0.0);
            let base = 2.0 * s.sqrt();
            base * (neck + (1.0 - neck) * (x * x / (x * x + 0.3)))
        };
        let nodes: Vec<Point> = (0..=600)
            .map(|i| {
                let x = -3.0 + 6.0 * i as f64 / 600.0;
                let r = if i == 0 || i == 600 { 0.0 } else { f(x) };
                Point::new(x, r)
            })
            .collect();
        ProfileGraph::new(nodes, [true, true]).unwrap()
    }

    fn cfg() -> FlowConfig {
        FlowConfig {
            n: 3,
            spacing: 0.01,
            cfl: 0.5,
            pinch_eps: 0.05,
            tip_eps: 0.05,
            max_time: 1.0,
            snapshot_stride: 0.1,
        }
    }

    #[test]
    fn split_produces_two_valid_components() {
        let g = dumbbell_like(0.02);
        let state = FlowState::new(vec![g.clone()]);
        assert!(find_neck(&state, &cfg()).is_some());
        let (out, events) = handle_pinch(&state, &cfg());
        assert_eq!(out.status, Status::Running);
        assert_eq!(out.components.len(), 2);
        for c in &out.components {
            c.check_invariants().unwrap();
        }
        let kinds: Vec<_> = events.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::Pinch, EventKind::Split]);
        let before = enclosed_area_above(&g, 0.0).unwrap();
        let after: f64 = out
            .components
            .iter()
            .map(|c| enclosed_area_above(c, 0.0).unwrap())
            .sum();
        assert!((before - after).abs() < 8.0 * 0.05 * 0.05, "{before} {after}");
    }

    #[test]
    fn tiny_component_goes_extinct() {
        let nodes: Vec<Point> = (0..=20)
            .map(|i| {
                let th = std::f64::consts::PI * (1.0 - i as f64 / 20.0);
                Point::new(0.01 * th.cos(), if i == 0 || i == 20 { 0.0 } else { 0.01 * th.sin() })
            })
            .collect();
        let mut state = FlowState::new(vec![ProfileGraph::new(nodes, [true, true]).unwrap()]);
        let mut events = Vec::new();
        remove_small(&mut state, &cfg(), &mut events);
        assert!(state.components.is_empty());
        assert_eq!(events[0].kind, EventKind::ComponentExtinct);
    }
}
