//! Comparison solutions: shrinking spheres and cylinders, catenoids, a
//! translating grim reaper, a shrinking torus and slab walls.

mod catenoid;
mod torus;

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::curve::{segment_set_distance, CurveView, ParamCurve, Point, Region};
use crate::error::BarrierError;
use crate::flow::FlowTrace;
use crate::measure::{count_intersections, point_in_polygon};

pub use catenoid::{catenoid_half_width, catenoid_profile};
pub use torus::{shrinker_residual, torus_shrinker_profile, TorusShrinker};

/// Radius of the shrinking sphere `R(t) = sqrt(R0^2 - 2 n t)`.
pub fn shrinking_sphere(r0: f64, n: usize, t: f64) -> Result<f64, BarrierError> {
    shrink_law(r0, n as f64, t, "R0")
}

/// Radius of the shrinking cylinder `u(t) = sqrt(u0^2 - 2 (n - 1) t)`.
pub fn shrinking_cylinder(u0: f64, n: usize, t: f64) -> Result<f64, BarrierError> {
    if n < 2 {
        return Err(BarrierError::Parameter(format!("dimension n = {n} must be at least 2")));
    }
    shrink_law(u0, n as f64 - 1.0, t, "u0")
}

fn shrink_law(r0: f64, k: f64, t: f64, name: &str) -> Result<f64, BarrierError> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(BarrierError::Parameter(format!("{name} = {r0} must be positive")));
    }
    if k <= 0.0 {
        return Err(BarrierError::Parameter(format!("dimension must be at least 1, got {k}")));
    }
    let lifespan = r0 * r0 / (2.0 * k);
    if t > lifespan * (1.0 + 1e-12) || t.is_nan() {
        return Err(BarrierError::BeyondLifespan { t, lifespan });
    }
    Ok((r0 * r0 - 2.0 * k * t).max(0.0).sqrt())
}

/// A grim reaper in the half-plane together with the forcing it ignores.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrimProfile {
    pub curve: ParamCurve,
    /// `(n - 1) cos(theta) / r` at every node.
    pub deficit: Vec<f64>,
    pub max_deficit: f64,
    pub note: String,
}

/// The grim reaper `r = tip_r + t / scale - scale ln cos((x - center) / scale)`,
/// cut off `depth` above its tip and sampled at equal arc length.
pub fn grim_rotation_profile(
    scale: f64,
    tip_r: f64,
    n: usize,
    t: f64,
    depth: f64,
    nodes: usize,
) -> Result<GrimProfile, BarrierError> {
    if !(tip_r >= 1.0) {
        return Err(BarrierError::Parameter(format!(
            "tip_r = {tip_r} must be at least 1 to stay away from the axis"
        )));
    }
    if !(scale > 0.0) || !(depth > 0.0) || nodes < 3 {
        return Err(BarrierError::Parameter(format!(
            "need scale > 0, depth > 0 and nodes >= 3 (got {scale}, {depth}, {nodes})"
        )));
    }
    let tip = tip_r + t / scale;
    if !(tip > 0.0) {
        return Err(BarrierError::Parameter(format!("tip height {tip} at t = {t} is not positive")));
    }
    let psi_max = (-depth / scale).exp().acos();
    // Arc length from the tip is scale * asinh(tan psi).
    let s_max = scale * psi_max.tan().asinh();
    let k = n as f64 - 1.0;
    let mut points = Vec::with_capacity(nodes);
    let mut deficit = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let s = -s_max + 2.0 * s_max * i as f64 / (nodes - 1) as f64;
        let psi = (s / scale).sinh().atan();
        let r = tip - scale * psi.cos().ln();
        points.push(Point::new(scale * psi, r));
        deficit.push(k * psi.cos() / r);
    }
    let max_deficit = deficit.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    Ok(GrimProfile {
        curve: ParamCurve::open(points)?,
        deficit,
        max_deficit,
        note: "approximate barrier: forcing term ignored".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierKind {
    Sphere,
    Cylinder,
    Catenoid,
    GrimRotation,
    TorusShrinker,
    PancakeSlab,
}

impl BarrierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BarrierKind::Sphere => "sphere",
            BarrierKind::Cylinder => "cylinder",
            BarrierKind::Catenoid => "catenoid",
            BarrierKind::GrimRotation => "grim-rotation",
            BarrierKind::TorusShrinker => "torus-shrinker",
            BarrierKind::PancakeSlab => "pancake-slab",
        }
    }

    /// Whether the curve is an exact solution usable for comparison.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            BarrierKind::Sphere | BarrierKind::Cylinder | BarrierKind::Catenoid | BarrierKind::TorusShrinker
        )
    }
}

/// A comparison solution described by its kind and named parameters.
///
/// Every kind reads `center` (default 0) as an x-offset and `nodes` as
/// the sample count of its profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierCurve {
    pub kind: BarrierKind,
    pub params: BTreeMap<String, f64>,
}

fn table(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

type TorusCache = Mutex<HashMap<(usize, usize), Arc<TorusShrinker>>>;

fn cached_torus(n: usize, nodes: usize) -> Result<Arc<TorusShrinker>, BarrierError> {
    static CACHE: OnceLock<TorusCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(n, nodes)) {
        return Ok(t.clone());
    }
    let t = Arc::new(torus_shrinker_profile(n, nodes)?);
    cache.lock().unwrap().insert((n, nodes), t.clone());
    Ok(t)
}

impl BarrierCurve {
    /// Sphere of radius `r0` at `t = 0` centered on the axis at `center`.
    pub fn sphere(r0: f64, n: usize, center: f64) -> Self {
        Self {
            kind: BarrierKind::Sphere,
            params: table(&[("r0", r0), ("n", n as f64), ("center", center), ("nodes", 401.0)]),
        }
    }

    /// Cylinder of radius `u0` at `t = 0`, drawn over `x0 <= x <= x1`.
    pub fn cylinder(u0: f64, n: usize, x0: f64, x1: f64) -> Self {
        Self {
            kind: BarrierKind::Cylinder,
            params: table(&[("u0", u0), ("n", n as f64), ("x0", x0), ("x1", x1), ("nodes", 401.0)]),
        }
    }

    pub fn catenoid(n: usize, c: f64, r_max: f64, center: f64) -> Self {
        Self {
            kind: BarrierKind::Catenoid,
            params: table(&[("n", n as f64), ("c", c), ("r_max", r_max), ("center", center), ("nodes", 801.0)]),
        }
    }

    pub fn grim_rotation(scale: f64, tip_r: f64, n: usize, depth: f64) -> Self {
        Self {
            kind: BarrierKind::GrimRotation,
            params: table(&[
                ("scale", scale),
                ("tip_r", tip_r),
                ("n", n as f64),
                ("depth", depth),
                ("center", 0.0),
                ("nodes", 401.0),
            ]),
        }
    }

    /// Shrinking torus becoming singular at time `t0`.
    pub fn torus_shrinker(n: usize, t0: f64) -> Self {
        Self {
            kind: BarrierKind::TorusShrinker,
            params: table(&[("n", n as f64), ("t0", t0), ("center", 0.0), ("nodes", 2000.0)]),
        }
    }

    /// The right wall `x = center + half_width` of a slab, up to `r_max`;
    /// the left wall is its mirror image.
    pub fn pancake_slab(half_width: f64, r_max: f64) -> Self {
        Self {
            kind: BarrierKind::PancakeSlab,
            params: table(&[("half_width", half_width), ("r_max", r_max), ("center", 0.0), ("nodes", 101.0)]),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn param(&self, name: &str) -> Result<f64, BarrierError> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| BarrierError::Parameter(format!("{} needs parameter `{name}`", self.kind.as_str())))
    }

    fn param_or(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn dim(&self) -> Result<usize, BarrierError> {
        let n = self.param("n")?;
        if n.fract() != 0.0 || n < 1.0 {
            return Err(BarrierError::Parameter(format!("dimension n = {n} is not a positive integer")));
        }
        Ok(n as usize)
    }

    fn nodes(&self) -> usize {
        self.param_or("nodes", 401.0).max(3.0) as usize
    }

    /// End of the time span on which the profile exists; `None` for
    /// eternal solutions. The profile is defined for `t < end`.
    pub fn lifespan_end(&self) -> Result<Option<f64>, BarrierError> {
        Ok(match self.kind {
            BarrierKind::Sphere => Some(self.param("r0")?.powi(2) / (2.0 * self.dim()? as f64)),
            BarrierKind::Cylinder => Some(self.param("u0")?.powi(2) / (2.0 * (self.dim()? as f64 - 1.0))),
            BarrierKind::TorusShrinker => Some(self.param_or("t0", 0.0)),
            _ => None,
        })
    }

    pub fn is_static(&self) -> bool {
        matches!(self.kind, BarrierKind::Catenoid | BarrierKind::PancakeSlab)
    }

    /// Profile curve at time `t`, ordered left to right for the open kinds
    /// and clockwise for the closed torus.
    pub fn profile(&self, t: f64) -> Result<ParamCurve, BarrierError> {
        if let Some(end) = self.lifespan_end()? {
            if !(t < end) {
                return Err(BarrierError::BeyondLifespan { t, lifespan: end });
            }
        }
        let cx = self.param_or("center", 0.0);
        let m = self.nodes();
        let curve = match self.kind {
            BarrierKind::Sphere => {
                let rad = shrinking_sphere(self.param("r0")?, self.dim()?, t)?;
                let pts = (0..m)
                    .map(|i| {
                        let th = PI * (1.0 - i as f64 / (m - 1) as f64);
                        let r = if i == 0 || i == m - 1 { 0.0 } else { rad * th.sin() };
                        Point::new(cx + rad * th.cos(), r)
                    })
                    .collect();
                ParamCurve::open(pts)?
            }
            BarrierKind::Cylinder => {
                let u = shrinking_cylinder(self.param("u0")?, self.dim()?, t)?;
                let (x0, x1) = (self.param("x0")?, self.param("x1")?);
                if !(x0 < x1) {
                    return Err(BarrierError::Parameter(format!("empty cylinder range [{x0}, {x1}]")));
                }
                let pts = (0..m)
                    .map(|i| Point::new(x0 + (x1 - x0) * i as f64 / (m - 1) as f64, u))
                    .collect();
                ParamCurve::open(pts)?
            }
            BarrierKind::Catenoid => {
                let c = catenoid_profile(self.dim()?, self.param("c")?, self.param("r_max")?, m)?;
                c.translated(Point::new(cx, 0.0))
            }
            BarrierKind::GrimRotation => {
                let g = grim_rotation_profile(
                    self.param("scale")?,
                    self.param("tip_r")?,
                    self.dim()?,
                    t,
                    self.param("depth")?,
                    m,
                )?;
                g.curve.translated(Point::new(cx, 0.0))
            }
            BarrierKind::TorusShrinker => {
                let shape = cached_torus(self.dim()?, m)?;
                let k = (self.param_or("t0", 0.0) - t).sqrt();
                let pts = shape.curve.points.iter().map(|p| Point::new(cx + k * p.x, k * p.r)).collect();
                ParamCurve::closed(pts)?
            }
            BarrierKind::PancakeSlab => {
                let x = cx + self.param("half_width")?;
                let top = self.param("r_max")?;
                if !(top > 0.0) {
                    return Err(BarrierError::Parameter(format!("r_max = {top} must be positive")));
                }
                let pts = (0..m).map(|i| Point::new(x, top * i as f64 / (m - 1) as f64)).collect();
                ParamCurve::open(pts)?
            }
        };
        Ok(curve)
    }

    /// Whether `p` lies on the bounded (or axis-free) side of the profile at time `t`.
    fn inside(&self, curve: &ParamCurve, p: Point) -> bool {
        match self.kind {
            BarrierKind::Cylinder => p.r < curve.points[0].r,
            BarrierKind::PancakeSlab => p.x < curve.points[0].x,
            // Sphere and catenoid close up along the axis or across the top;
            // the torus is a loop.
            _ => point_in_polygon(p, &curve.points, 0.0),
        }
    }
}

/// Distance and intersection record of one snapshot against a barrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceRow {
    pub t: f64,
    pub distance: f64,
    pub crossings: usize,
    /// Largest distance of a node that has crossed to the barrier's other side.
    pub penetration: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceReport {
    pub barrier: BarrierKind,
    pub slack: f64,
    pub rows: Vec<AvoidanceRow>,
    pub passes: bool,
}

/// Checks that a trace stays on one side of an exact barrier inside `window`.
///
/// Snapshots outside the barrier's lifespan are skipped. A snapshot is
/// flagged when a node has crossed to the other side by more than twice the
/// flow spacing.
pub fn avoidance_check(
    trace: &FlowTrace,
    barrier: &BarrierCurve,
    window: &Region,
) -> Result<AvoidanceReport, BarrierError> {
    if !barrier.kind.is_exact() {
        return Err(BarrierError::NotBarrier(format!(
            "{} is not an exact solution",
            barrier.kind.as_str()
        )));
    }
    let slack = 2.0 * trace.config.spacing;
    let end = barrier.lifespan_end()?;
    let mut side: Option<bool> = None;
    let mut rows = Vec::new();
    for state in trace.states() {
        if end.is_some_and(|e| state.t >= e) {
            continue;
        }
        let curve = barrier.profile(state.t)?;
        let bar_segs: Vec<(Point, Point)> = CurveView::Param(&curve)
            .segments()
            .into_iter()
            .filter_map(|(a, b)| window.clip_segment(a, b))
            .collect();
        let mut distance = f64::INFINITY;
        let mut crossings = 0;
        let mut penetration = 0.0_f64;
        for comp in &state.components {
            let segs: Vec<(Point, Point)> = CurveView::Graph(comp)
                .segments()
                .into_iter()
                .filter_map(|(a, b)| window.clip_segment(a, b))
                .collect();
            if segs.is_empty() || bar_segs.is_empty() {
                continue;
            }
            distance = distance.min(segment_set_distance(&segs, &bar_segs));
            crossings += count_intersections(comp, &curve, 1e-12)
                .map(|c| c.crossings)
                .unwrap_or(0);
            for &p in comp.nodes().iter().filter(|p| window.contains(**p)) {
                let s = barrier.inside(&curve, p);
                match side {
                    None => side = Some(s),
                    Some(s0) if s0 != s => {
                        let d = bar_segs
                            .iter()
                            .map(|&(a, b)| crate::curve::point_segment_distance(p, a, b))
                            .fold(f64::INFINITY, f64::min);
                        penetration = penetration.max(d);
                    }
                    _ => {}
                }
            }
        }
        if rows.is_empty() && (crossings > 0 || penetration > 0.0) {
            return Err(BarrierError::NotBarrier(format!(
                "trace meets the {} at t = {}",
                barrier.kind.as_str(),
                state.t
            )));
        }
        rows.push(AvoidanceRow {
            t: state.t,
            distance,
            crossings,
            penetration,
            flagged: penetration > slack,
        });
    }
    let passes = rows.iter().all(|r| !r.flagged);
    Ok(AvoidanceReport {
        barrier: barrier.kind,
        slack,
        rows,
        passes,
    })
}

/// Width `pi * scale` of the slab containing a grim reaper.
pub fn grim_slab_width(scale: f64) -> f64 {
    2.0 * FRAC_PI_2 * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinking_laws() {
        assert_eq!(shrinking_sphere(1.0, 3, 1.0 / 6.0).unwrap(), 0.0);
        assert!((shrinking_sphere(5.0, 3, 1.0).unwrap() - 19f64.sqrt()).abs() < 1e-14);
        assert!((shrinking_cylinder(10.0, 3, 1.0).unwrap() - 96f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            shrinking_sphere(1.0, 3, 0.2),
            Err(BarrierError::BeyondLifespan { .. })
        ));
    }

    #[test]
    fn grim_translates_and_bounds_deficit() {
        let a = grim_rotation_profile(0.1, 1.0, 3, 0.0, 0.5, 101).unwrap();
        let b = grim_rotation_profile(0.1, 1.0, 3, 1.0, 0.5, 101).unwrap();
        for (p, q) in a.curve.points.iter().zip(&b.curve.points) {
            assert!((q.x - p.x).abs() < 1e-14 && (q.r - p.r - 10.0).abs() < 1e-12);
        }
        assert!(a.max_deficit <= 2.0 / 1.0);
        let xs: Vec<f64> = a.curve.points.iter().map(|p| p.x).collect();
        assert!(xs.iter().all(|x| x.abs() < 0.5 * grim_slab_width(0.1)));
        assert!(grim_rotation_profile(0.1, 0.5, 3, 0.0, 0.5, 101).is_err());
    }

    #[test]
    fn profiles_respect_lifespan() {
        let s = BarrierCurve::sphere(1.0, 3, 0.0);
        assert!(s.profile(0.1).is_ok());
        assert!(s.profile(1.0 / 6.0).is_err());
        let t = BarrierCurve::torus_shrinker(2, 0.0);
        assert!(t.profile(0.0).is_err());
        let p = t.profile(-4.0).unwrap();
        assert!(p.closed);
        let c = BarrierCurve::catenoid(3, 1.0, 3.0, 0.0);
        assert_eq!(c.profile(-100.0).unwrap(), c.profile(100.0).unwrap());
    }
}
