//! Geometric measurements on profile curves: curvature, Sturmian
//! intersection counts, critical points, clipped areas and Hausdorff
//! distances.

use serde::{Deserialize, Serialize};

use crate::curve::{point_segment_distance, CurveView, Point, ProfileGraph, Region};
use crate::error::GeometryError;

/// Signed curvature of the circle through `a, p, b`, positive for a
/// counter-clockwise turn. Exact on circles for any spacing.
#[inline]
pub fn menger_curvature(a: Point, p: Point, b: Point) -> f64 {
    let u = p - a;
    let v = b - p;
    let w = b - a;
    let denom = u.norm() * v.norm() * w.norm();
    if denom == 0.0 {
        return 0.0;
    }
    2.0 * u.cross(v) / denom
}

/// Unit tangent at `p` of the circle through `a, p, b`.
#[inline]
pub fn circle_tangent(a: Point, p: Point, b: Point) -> Point {
    let u = p - a;
    let v = b - p;
    let (lu, lv) = (u.norm(), v.norm());
    let t = u * (lv / lu) + v * (lu / lv);
    t * (1.0 / t.norm())
}

/// Curvature of a graph at a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureSample {
    /// Geodesic curvature; positive where the region below is locally convex.
    pub geodesic: f64,
    /// The graph-form diffusion term `u_xx / (1 + u_x^2)`.
    pub graph_term: f64,
    pub slope: f64,
}

pub fn curvature_at(curve: &ProfileGraph, index: usize) -> Result<CurvatureSample, GeometryError> {
    let pts = curve.nodes();
    if index == 0 || index + 1 >= pts.len() {
        return Err(GeometryError::NeedsInteriorNode {
            index,
            len: pts.len(),
        });
    }
    let (a, p, b) = (pts[index - 1], pts[index], pts[index + 1]);
    let geodesic = -menger_curvature(a, p, b);
    let t = circle_tangent(a, p, b);
    let slope = t.r / t.x;
    let graph_term = -geodesic * (1.0 + slope * slope).sqrt();
    Ok(CurvatureSample {
        geodesic,
        graph_term,
        slope,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionCount {
    /// Transverse crossings.
    pub crossings: usize,
    /// Near-contacts within `tol` that do not change the sign of the separation.
    pub contacts: usize,
}

/// Counts transverse intersections between two curves.
///
/// Graph pairs are compared through the sign of `u_a - u_b` on the union of
/// their abscissae; any other pair uses segment-segment tests.
pub fn count_intersections<'a, 'b>(
    a: impl Into<CurveView<'a>>,
    b: impl Into<CurveView<'b>>,
    tol: f64,
) -> Result<IntersectionCount, GeometryError> {
    if !(tol > 0.0) {
        return Err(GeometryError::NonPositiveTolerance(tol));
    }
    match (a.into(), b.into()) {
        (CurveView::Graph(ga), CurveView::Graph(gb)) => graph_intersections(ga, gb, tol),
        (va, vb) => segment_intersections(va, vb, tol),
    }
}

fn graph_intersections(
    a: &ProfileGraph,
    b: &ProfileGraph,
    tol: f64,
) -> Result<IntersectionCount, GeometryError> {
    let (a0, a1) = a.x_range();
    let (b0, b1) = b.x_range();
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    let mut out = IntersectionCount::default();
    if !(lo < hi) {
        return Ok(out);
    }
    let mut grid: Vec<f64> = a
        .xs()
        .chain(b.xs())
        .filter(|&x| x > lo && x < hi)
        .collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let seps: Vec<(f64, f64)> = grid
        .iter()
        .map(|&x| (x, a.height_at(x).unwrap() - b.height_at(x).unwrap()))
        .collect();
    classify_sign_sequence(&seps, tol, &mut out)?;
    Ok(out)
}

/// Walks `(position, separation)` pairs and tallies sign changes.
fn classify_sign_sequence(
    seps: &[(f64, f64)],
    tol: f64,
    out: &mut IntersectionCount,
) -> Result<(), GeometryError> {
    let sign = |d: f64| {
        if d.abs() <= tol {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut prev: i32 = 0;
    let mut zero_start: Option<usize> = None;
    for (i, &(_, d)) in seps.iter().enumerate() {
        let s = sign(d);
        if s == 0 {
            zero_start.get_or_insert(i);
            continue;
        }
        if let Some(z) = zero_start.take() {
            check_overlap(seps, z, i - 1, tol)?;
            if prev != 0 {
                if prev != s {
                    out.crossings += 1;
                } else {
                    out.contacts += 1;
                }
            }
        } else if prev != 0 && prev != s {
            out.crossings += 1;
        }
        prev = s;
    }
    if let Some(z) = zero_start {
        check_overlap(seps, z, seps.len() - 1, tol)?;
    }
    Ok(())
}

fn check_overlap(seps: &[(f64, f64)], i0: usize, i1: usize, tol: f64) -> Result<(), GeometryError> {
    let length = seps[i1].0 - seps[i0].0;
    if i1 > i0 && length > tol {
        return Err(GeometryError::NonTransverseOverlap {
            x: seps[i0].0,
            length,
        });
    }
    Ok(())
}

fn segment_intersections(
    a: CurveView<'_>,
    b: CurveView<'_>,
    tol: f64,
) -> Result<IntersectionCount, GeometryError> {
    let sa = a.segments();
    let sb = b.segments();
    let mut out = IntersectionCount::default();
    let bbox = |p: Point, q: Point| (p.x.min(q.x), p.x.max(q.x), p.r.min(q.r), p.r.max(q.r));
    let boxes_b: Vec<_> = sb.iter().map(|&(p, q)| bbox(p, q)).collect();
    let mut crossing_params: Vec<f64> = Vec::new();
    for (i, &(p, q)) in sa.iter().enumerate() {
        let (x0, x1, r0, r1) = bbox(p, q);
        for (j, &(s, t)) in sb.iter().enumerate() {
            let (y0, y1, w0, w1) = boxes_b[j];
            if x1 < y0 || y1 < x0 || r1 < w0 || w1 < r0 {
                continue;
            }
            let d = q - p;
            let e = t - s;
            let den = d.cross(e);
            if den == 0.0 {
                continue;
            }
            let f = s - p;
            let tp = f.cross(e) / den;
            let ts = f.cross(d) / den;
            if (0.0..1.0).contains(&tp) && (0.0..1.0).contains(&ts) {
                out.crossings += 1;
                crossing_params.push(i as f64 + tp);
            }
        }
    }

    // Contacts: runs of vertices of `a` within tol of `b` that hold no crossing.
    let pts = a.points();
    let near: Vec<bool> = pts
        .iter()
        .map(|&p| {
            sb.iter()
                .any(|&(s, t)| point_segment_distance(p, s, t) <= tol)
        })
        .collect();
    let mut i = 0;
    while i < near.len() {
        if !near[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < near.len() && near[i + 1] {
            i += 1;
        }
        let end = i;
        let arc: f64 = pts[start..=end].windows(2).map(|w| w[0].dist(w[1])).sum();
        if end > start && arc > tol {
            return Err(GeometryError::NonTransverseOverlap {
                x: pts[start].x,
                length: arc,
            });
        }
        let lo = start as f64 - 1.0;
        let hi = end as f64 + 1.0;
        if !crossing_params.iter().any(|&c| c >= lo && c <= hi) {
            out.contacts += 1;
        }
        i += 1;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub maxima: usize,
    pub minima: usize,
    pub locations: Vec<(f64, ExtremumKind)>,
}

impl CriticalPoints {
    pub fn total(&self) -> usize {
        self.maxima + self.minima
    }
}

/// Default plateau tolerance: `1e-9` times the curve diameter.
pub fn default_plateau_tol(curve: &ProfileGraph) -> f64 {
    let (x0, x1) = curve.x_range();
    1e-9 * (x1 - x0).hypot(curve.max_height())
}

/// Strict interior extrema of the heights after merging plateaus.
pub fn count_critical_points(curve: &ProfileGraph, plateau_tol: f64) -> CriticalPoints {
    let pts = curve.nodes();
    // Plateau groups: (value, x_start, x_end).
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for p in pts {
        match groups.last_mut() {
            Some(g) if (p.r - g.0).abs() <= plateau_tol => g.2 = p.x,
            _ => groups.push((p.r, p.x, p.x)),
        }
    }
    let mut out = CriticalPoints::default();
    if groups.len() == 1 {
        let (x0, x1) = curve.x_range();
        out.maxima = 1;
        out.locations.push((0.5 * (x0 + x1), ExtremumKind::Max));
        return out;
    }
    for k in 1..groups.len().saturating_sub(1) {
        let (prev, cur, next) = (groups[k - 1].0, groups[k].0, groups[k + 1].0);
        let at = 0.5 * (groups[k].1 + groups[k].2);
        if cur > prev && cur > next {
            out.maxima += 1;
            out.locations.push((at, ExtremumKind::Max));
        } else if cur < prev && cur < next {
            out.minima += 1;
            out.locations.push((at, ExtremumKind::Min));
        }
    }
    out
}

/// Closed polygon bounding the region enclosed by a curve and the axis.
fn enclosing_polygon(curve: CurveView<'_>) -> Result<Vec<Point>, GeometryError> {
    let pts = curve.points();
    match curve {
        CurveView::Param(c) if c.closed => Ok(pts.to_vec()),
        CurveView::Param(_) => {
            if pts[0].r != 0.0 || pts[pts.len() - 1].r != 0.0 {
                return Err(GeometryError::NotClosed);
            }
            Ok(pts.to_vec())
        }
        CurveView::Graph(_) => {
            let mut poly = Vec::with_capacity(pts.len() + 2);
            if pts[0].r > 0.0 {
                poly.push(Point::new(pts[0].x, 0.0));
            }
            poly.extend_from_slice(pts);
            let last = pts[pts.len() - 1];
            if last.r > 0.0 {
                poly.push(Point::new(last.x, 0.0));
            }
            Ok(poly)
        }
    }
}

pub fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * s
}

/// Sutherland-Hodgman clip of a polygon against `{r >= c}`.
fn clip_above(poly: &[Point], c: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 4);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let pin = p.r >= c;
        let qin = q.r >= c;
        if pin {
            out.push(p);
        }
        if pin != qin {
            let t = (c - p.r) / (q.r - p.r);
            out.push(p.lerp(q, t));
        }
    }
    out
}

/// Area of the part of the enclosed region lying above `r = c`.
pub fn enclosed_area_above<'a>(
    curve: impl Into<CurveView<'a>>,
    c: f64,
) -> Result<f64, GeometryError> {
    let poly = enclosing_polygon(curve.into())?;
    let clipped = clip_above(&poly, c);
    if clipped.len() < 3 {
        return Ok(0.0);
    }
    Ok(shoelace(&clipped).abs())
}

/// Result of a windowed Hausdorff comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "value")]
pub enum HausdorffOutcome {
    Distance(f64),
    /// Exactly one curve misses the window.
    OneSidedEmpty,
    /// Both curves miss the window.
    Empty,
}

impl HausdorffOutcome {
    pub fn value(self) -> Option<f64> {
        match self {
            HausdorffOutcome::Distance(d) => Some(d),
            _ => None,
        }
    }
}

fn clipped_segments(c: CurveView<'_>, window: &Region) -> Vec<(Point, Point)> {
    let segs = c.segments();
    if segs.is_empty() {
        return c
            .points()
            .iter()
            .filter(|p| window.contains(**p))
            .map(|&p| (p, p))
            .collect();
    }
    segs.into_iter()
        .filter_map(|(a, b)| window.clip_segment(a, b))
        .collect()
}

fn directed_hausdorff(from: &[(Point, Point)], to: &[(Point, Point)]) -> f64 {
    let mut worst = 0.0_f64;
    for &(a, b) in from {
        for p in [a, a.lerp(b, 0.5), b] {
            let mut best = f64::INFINITY;
            for &(s, t) in to {
                best = best.min(point_segment_distance(p, s, t));
                if best <= worst {
                    break;
                }
            }
            worst = worst.max(best);
        }
    }
    worst
}

/// Symmetric Hausdorff distance between two curves clipped to `window`.
pub fn hausdorff_distance<'a, 'b>(
    a: impl Into<CurveView<'a>>,
    b: impl Into<CurveView<'b>>,
    window: &Region,
) -> HausdorffOutcome {
    let sa = clipped_segments(a.into(), window);
    let sb = clipped_segments(b.into(), window);
    hausdorff_between(&sa, &sb)
}

/// Hausdorff distance between two clipped segment sets (several curves per side allowed).
pub fn hausdorff_between(sa: &[(Point, Point)], sb: &[(Point, Point)]) -> HausdorffOutcome {
    match (sa.is_empty(), sb.is_empty()) {
        (true, true) => HausdorffOutcome::Empty,
        (true, false) | (false, true) => HausdorffOutcome::OneSidedEmpty,
        _ => HausdorffOutcome::Distance(directed_hausdorff(sa, sb).max(directed_hausdorff(sb, sa))),
    }
}

/// Segments of several curves clipped to a window.
pub fn clip_curves<'a>(curves: impl IntoIterator<Item = CurveView<'a>>, window: &Region) -> Vec<(Point, Point)> {
    curves
        .into_iter()
        .flat_map(|c| clipped_segments(c, window))
        .collect()
}

/// Even-odd point-in-polygon test; points within `tol` of the boundary
/// count as inside.
pub fn point_in_polygon(p: Point, poly: &[Point], tol: f64) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if point_segment_distance(p, a, b) <= tol {
            return true;
        }
        if (a.r > p.r) != (b.r > p.r) {
            let x = a.x + (p.r - a.r) * (b.x - a.x) / (b.r - a.r);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// The closed region bounded by a graph and the axis, as a polygon.
pub fn graph_polygon(curve: &ProfileGraph) -> Vec<Point> {
    enclosing_polygon(CurveView::Graph(curve)).expect("graphs always close along the axis")
}

/// Connected pieces of a polyline lying in `{r > c}`, with interpolated
/// entry and exit points.
pub fn arcs_above(pts: &[Point], c: f64) -> Vec<Vec<Point>> {
    let mut arcs = Vec::new();
    let mut cur: Vec<Point> = Vec::new();
    for i in 0..pts.len() {
        let p = pts[i];
        if p.r > c {
            if cur.is_empty() && i > 0 {
                let q = pts[i - 1];
                cur.push(q.lerp(p, (c - q.r) / (p.r - q.r)));
            }
            cur.push(p);
        } else if !cur.is_empty() {
            let q = pts[i - 1];
            cur.push(q.lerp(p, (c - q.r) / (p.r - q.r)));
            arcs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        arcs.push(cur);
    }
    arcs
}

/// Signed total turning of an open polyline, in radians.
pub fn total_turning(pts: &[Point]) -> f64 {
    pts.windows(3)
        .map(|w| {
            let u = w[1] - w[0];
            let v = w[2] - w[1];
            u.cross(v).atan2(u.dot(v))
        })
        .sum()
}
