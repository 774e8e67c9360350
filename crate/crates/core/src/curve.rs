//! Discrete profile curves in the half-plane `{(x, r) : r >= 0}`.
//!
//! The `x` coordinate runs along the rotation axis and `r` is the distance
//! from it. Rotating a profile about the `x`-axis recovers the hypersurface.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Minimum node count of a [`ProfileGraph`].
pub const MIN_NODES: usize = 8;

/// Allowed ratio between any adjacent spacing and the mean spacing.
pub const SPACING_FACTOR: f64 = 4.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub r: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, r: f64) -> Self {
        Self { x, r }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.r * o.r
    }

    /// z-component of the planar cross product.
    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.r - self.r * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        (self.x * self.x + self.r * self.r).sqrt()
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Rotation by +90 degrees.
    #[inline]
    pub fn perp(self) -> Point {
        Point::new(-self.r, self.x)
    }

    #[inline]
    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.r + (o.r - self.r) * t)
    }

    #[inline]
    pub fn mirrored(self, about_x: f64) -> Point {
        Point::new(2.0 * about_x - self.x, self.r)
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.r + o.r)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.r - o.r)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.r * s)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.r)
    }
}

/// A profile that is a graph `r = u(x)` over an interval of the axis.
///
/// Nodes are stored as points; the `x` coordinates are strictly increasing.
/// An end flagged in `closed_ends` sits on the axis (`u = 0`), where the
/// hypersurface closes up with a smooth cap. An open end is a reflecting
/// boundary (zero slope), used for cylinders and periodic-style padding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileGraph {
    nodes: Vec<Point>,
    closed_ends: [bool; 2],
}

impl ProfileGraph {
    /// Builds a graph, checking ordering, sign and size invariants.
    ///
    /// The spacing invariant is checked separately by
    /// [`ProfileGraph::check_invariants`] since hand-built test graphs
    /// frequently use uniform `x` sampling.
    pub fn new(nodes: Vec<Point>, closed_ends: [bool; 2]) -> Result<Self, GeometryError> {
        let g = Self { nodes, closed_ends };
        g.check_shape()?;
        Ok(g)
    }

    /// Samples `u` at `count` uniformly spaced abscissae on `[x0, x1]`.
    pub fn from_fn(
        x0: f64,
        x1: f64,
        count: usize,
        closed_ends: [bool; 2],
        u: impl Fn(f64) -> f64,
    ) -> Result<Self, GeometryError> {
        let count = count.max(2);
        let nodes = (0..count)
            .map(|i| {
                let x = x0 + (x1 - x0) * i as f64 / (count - 1) as f64;
                Point::new(x, u(x))
            })
            .collect();
        Self::new(nodes, closed_ends)
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<Point>, closed_ends: [bool; 2]) -> Self {
        Self { nodes, closed_ends }
    }

    #[inline]
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Point> {
        self.nodes
    }

    #[inline]
    pub fn closed_ends(&self) -> [bool; 2] {
        self.closed_ends
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|p| p.x)
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|p| p.r)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.nodes[0].x, self.nodes[self.nodes.len() - 1].x)
    }

    pub fn max_height(&self) -> f64 {
        self.heights().fold(0.0, f64::max)
    }

    /// Piecewise-linear height at `x`, `None` outside the domain.
    pub fn height_at(&self, x: f64) -> Option<f64> {
        let (a, b) = self.x_range();
        if x < a || x > b {
            return None;
        }
        let j = self.nodes.partition_point(|p| p.x <= x);
        if j == 0 {
            return Some(self.nodes[0].r);
        }
        if j >= self.nodes.len() {
            return Some(self.nodes[self.nodes.len() - 1].r);
        }
        let (p, q) = (self.nodes[j - 1], self.nodes[j]);
        let t = (x - p.x) / (q.x - p.x);
        Some(p.r + t * (q.r - p.r))
    }

    /// Total polyline length.
    pub fn length(&self) -> f64 {
        polyline_length(&self.nodes)
    }

    /// Mirror image under `x -> 2 about - x`.
    pub fn reflected(&self, about: f64) -> ProfileGraph {
        let nodes = self.nodes.iter().rev().map(|p| p.mirrored(about)).collect();
        ProfileGraph {
            nodes,
            closed_ends: [self.closed_ends[1], self.closed_ends[0]],
        }
    }

    pub fn to_param(&self) -> ParamCurve {
        ParamCurve {
            points: self.nodes.clone(),
            closed: false,
        }
    }

    fn check_shape(&self) -> Result<(), GeometryError> {
        let n = self.nodes.len();
        if n < MIN_NODES {
            return Err(GeometryError::TooFewNodes(n));
        }
        for (i, w) in self.nodes.windows(2).enumerate() {
            if !(w[1].x > w[0].x) {
                return Err(GeometryError::NonMonotone { index: i + 1 });
            }
        }
        for (i, p) in self.nodes.iter().enumerate() {
            if !(p.r >= 0.0) || !p.x.is_finite() || !p.r.is_finite() {
                return Err(GeometryError::NegativeHeight { index: i });
            }
        }
        if self.closed_ends[0] && self.nodes[0].r != 0.0 {
            return Err(GeometryError::OpenCap { index: 0 });
        }
        if self.closed_ends[1] && self.nodes[n - 1].r != 0.0 {
            return Err(GeometryError::OpenCap { index: n - 1 });
        }
        for (i, p) in self.nodes.iter().enumerate().take(n - 1).skip(1) {
            if p.r <= 0.0 {
                return Err(GeometryError::NegativeHeight { index: i });
            }
        }
        Ok(())
    }

    /// All invariants, including the resampling contract on spacing.
    pub fn check_invariants(&self) -> Result<(), GeometryError> {
        self.check_shape()?;
        check_spacing(&self.nodes)
    }
}

/// An ordered sequence of points; closure is implicit when `closed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamCurve {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl ParamCurve {
    pub fn new(points: Vec<Point>, closed: bool) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewNodes(points.len()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(GeometryError::RepeatedPoint { index: i + 1 });
            }
        }
        if closed && points[0] == points[points.len() - 1] {
            return Err(GeometryError::RepeatedPoint { index: points.len() - 1 });
        }
        Ok(Self { points, closed })
    }

    pub fn open(points: Vec<Point>) -> Result<Self, GeometryError> {
        Self::new(points, false)
    }

    pub fn closed(points: Vec<Point>) -> Result<Self, GeometryError> {
        Self::new(points, true)
    }

    /// Segments, including the closing one for closed curves.
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let m = if self.closed { n } else { n - 1 };
        (0..m).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn translated(&self, d: Point) -> ParamCurve {
        ParamCurve {
            points: self.points.iter().map(|&p| p + d).collect(),
            closed: self.closed,
        }
    }
}

/// Borrowed view over either curve kind.
#[derive(Clone, Copy, Debug)]
pub enum CurveView<'a> {
    Graph(&'a ProfileGraph),
    Param(&'a ParamCurve),
}

impl<'a> CurveView<'a> {
    pub fn points(&self) -> &'a [Point] {
        match self {
            CurveView::Graph(g) => g.nodes(),
            CurveView::Param(c) => &c.points,
        }
    }

    pub fn is_loop(&self) -> bool {
        matches!(self, CurveView::Param(c) if c.closed)
    }

    pub fn segments(&self) -> Vec<(Point, Point)> {
        let pts = self.points();
        let n = pts.len();
        let m = if self.is_loop() { n } else { n.saturating_sub(1) };
        (0..m).map(|i| (pts[i], pts[(i + 1) % n])).collect()
    }
}

impl<'a> From<&'a ProfileGraph> for CurveView<'a> {
    fn from(g: &'a ProfileGraph) -> Self {
        CurveView::Graph(g)
    }
}

impl<'a> From<&'a ParamCurve> for CurveView<'a> {
    fn from(c: &'a ParamCurve) -> Self {
        CurveView::Param(c)
    }
}

/// Axis-aligned rectangle in the half-plane; bounds may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x: (f64, f64),
    pub r: (f64, f64),
}

impl Region {
    pub fn new(x: (f64, f64), r: (f64, f64)) -> Result<Self, GeometryError> {
        if !(x.0 < x.1) || !(r.0 < r.1) {
            return Err(GeometryError::EmptyRegion);
        }
        Ok(Self { x, r })
    }

    pub fn everything() -> Self {
        Self {
            x: (f64::NEG_INFINITY, f64::INFINITY),
            r: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `C_R = {r < R}`.
    pub fn below(radius: f64) -> Self {
        Self {
            x: (f64::NEG_INFINITY, f64::INFINITY),
            r: (f64::NEG_INFINITY, radius),
        }
    }

    /// `D_c = {r > c}`.
    pub fn above(c: f64) -> Self {
        Self {
            x: (f64::NEG_INFINITY, f64::INFINITY),
            r: (c, f64::INFINITY),
        }
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x.0 && p.x <= self.x.1 && p.r >= self.r.0 && p.r <= self.r.1
    }

    /// Clips a segment with Liang-Barsky; `None` when it misses the box.
    pub fn clip_segment(&self, a: Point, b: Point) -> Option<(Point, Point)> {
        let d = b - a;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let checks = [
            (-d.x, a.x - self.x.0),
            (d.x, self.x.1 - a.x),
            (-d.r, a.r - self.r.0),
            (d.r, self.r.1 - a.r),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let t = q / p;
                if p < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        if t0 > t1 {
            return None;
        }
        Some((a.lerp(b, t0), a.lerp(b, t1)))
    }
}

pub fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

pub(crate) fn check_spacing(pts: &[Point]) -> Result<(), GeometryError> {
    let n = pts.len();
    if n < 2 {
        return Ok(());
    }
    let mean = polyline_length(pts) / (n - 1) as f64;
    for (i, w) in pts.windows(2).enumerate() {
        let h = w[0].dist(w[1]);
        if h > SPACING_FACTOR * mean || h * SPACING_FACTOR < mean {
            return Err(GeometryError::UnevenSpacing {
                index: i,
                spacing: h,
                mean,
            });
        }
    }
    Ok(())
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Minimum distance between two polylines given as segment lists.
pub fn segment_set_distance(a: &[(Point, Point)], b: &[(Point, Point)]) -> f64 {
    let mut best = f64::INFINITY;
    for &(p, q) in a {
        for &(s, t) in b {
            if segments_cross(p, q, s, t) {
                return 0.0;
            }
            let d = point_segment_distance(p, s, t)
                .min(point_segment_distance(q, s, t))
                .min(point_segment_distance(s, p, q))
                .min(point_segment_distance(t, p, q));
            best = best.min(d);
        }
    }
    best
}

/// Proper or touching intersection of two closed segments.
pub fn segments_cross(p: Point, q: Point, s: Point, t: Point) -> bool {
    let d1 = (q - p).cross(s - p);
    let d2 = (q - p).cross(t - p);
    let d3 = (t - s).cross(p - s);
    let d4 = (t - s).cross(q - s);
    (d1 * d2 <= 0.0) && (d3 * d4 <= 0.0) && !(d1 == 0.0 && d2 == 0.0 && d3 == 0.0 && d4 == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_rejects_decreasing_x() {
        let nodes: Vec<Point> = (0..10).map(|i| Point::new(-(i as f64), 1.0)).collect();
        assert!(matches!(
            ProfileGraph::new(nodes, [false, false]),
            Err(GeometryError::NonMonotone { .. })
        ));
    }

    #[test]
    fn graph_rejects_open_cap() {
        let g = ProfileGraph::from_fn(0.0, 1.0, 10, [true, false], |_| 1.0);
        assert!(matches!(g, Err(GeometryError::OpenCap { index: 0 })));
    }

    #[test]
    fn graph_rejects_small() {
        assert!(ProfileGraph::from_fn(0.0, 1.0, 5, [false, false], |_| 1.0).is_err());
    }

    #[test]
    fn uneven_spacing_is_reported() {
        let mut nodes: Vec<Point> = (0..10).map(|i| Point::new(i as f64, 1.0)).collect();
        nodes[9].x = 100.0;
        let g = ProfileGraph::new(nodes, [false, false]).unwrap();
        assert!(matches!(
            g.check_invariants(),
            Err(GeometryError::UnevenSpacing { .. })
        ));
    }

    #[test]
    fn height_interpolates() {
        let g = ProfileGraph::from_fn(0.0, 1.0, 11, [false, false], |x| 2.0 * x + 1.0).unwrap();
        assert!((g.height_at(0.25).unwrap() - 1.5).abs() < 1e-12);
        assert!(g.height_at(1.5).is_none());
    }

    #[test]
    fn region_clip() {
        let w = Region::new((0.0, 1.0), (0.0, 1.0)).unwrap();
        let (a, b) = w
            .clip_segment(Point::new(-1.0, 0.5), Point::new(2.0, 0.5))
            .unwrap();
        assert_eq!(a, Point::new(0.0, 0.5));
        assert_eq!(b, Point::new(1.0, 0.5));
        assert!(w
            .clip_segment(Point::new(-1.0, 2.0), Point::new(2.0, 2.0))
            .is_none());
        assert!(Region::new((1.0, 0.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn param_rejects_duplicates() {
        let p = Point::new(0.0, 1.0);
        assert!(ParamCurve::open(vec![p, p, Point::new(1.0, 1.0)]).is_err());
    }
}
