//! Arc-length-uniform resampling.
//!
//! The input polyline is interpolated by a cubic Hermite spline in the
//! cumulative-chord parameter; new nodes are placed on the spline at equal
//! chord distance with the first and last nodes fixed. Placing nodes at equal
//! chord (rather than equal parameter) makes the operation idempotent: the
//! nodes of an already-resampled curve are a solution of the same problem.

use crate::curve::{polyline_length, ParamCurve, Point, ProfileGraph, MIN_NODES};
use crate::error::GeometryError;
use crate::numeric::brent;

/// Resampling with a target chord length.
pub trait Resample: Sized {
    fn resample(&self, spacing: f64) -> Result<Self, GeometryError>;
}

/// Free-function form of [`Resample::resample`].
pub fn resample<C: Resample>(curve: &C, spacing: f64) -> Result<C, GeometryError> {
    curve.resample(spacing)
}

impl Resample for ProfileGraph {
    fn resample(&self, spacing: f64) -> Result<Self, GeometryError> {
        let pts = resample_points(self.nodes(), false, true, spacing)?;
        ProfileGraph::new(pts, self.closed_ends())
    }
}

impl Resample for ParamCurve {
    fn resample(&self, spacing: f64) -> Result<Self, GeometryError> {
        let pts = resample_points(&self.points, self.closed, false, spacing)?;
        ParamCurve::new(pts, self.closed)
    }
}

/// Cubic Hermite spline through a polyline, parametrized by cumulative chord.
struct Spline {
    pts: Vec<Point>,
    s: Vec<f64>,
    d: Vec<Point>,
}

/// Three-point derivative on a non-uniform grid.
fn centered(dl: f64, dr: f64, hl: f64, hr: f64) -> f64 {
    (hr * dl + hl * dr) / (hl + hr)
}

/// Fritsch-Carlson weighted harmonic mean (zero at sign changes).
fn pchip(dl: f64, dr: f64, hl: f64, hr: f64) -> f64 {
    if dl * dr <= 0.0 {
        return 0.0;
    }
    let w1 = 2.0 * hr + hl;
    let w2 = hr + 2.0 * hl;
    (w1 + w2) / (w1 / dl + w2 / dr)
}

/// Non-centered three-point end derivative, limited as in PCHIP.
fn pchip_end(d0: f64, d1: f64, h0: f64, h1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

fn end_derivative(d0: f64, d1: f64, h0: f64, h1: f64) -> f64 {
    ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
}

impl Spline {
    fn new(pts: &[Point], closed: bool, monotone_x: bool) -> Self {
        let mut pts = pts.to_vec();
        if closed {
            pts.push(pts[0]);
        }
        let n = pts.len();
        let mut s = Vec::with_capacity(n);
        s.push(0.0);
        for w in pts.windows(2) {
            s.push(s[s.len() - 1] + w[0].dist(w[1]));
        }
        let h: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<Point> = pts
            .windows(2)
            .zip(&h)
            .map(|(w, &hj)| (w[1] - w[0]) * (1.0 / hj))
            .collect();
        let mut d = vec![Point::new(0.0, 0.0); n];
        let m = h.len();
        for i in 1..n - 1 {
            let (dl, dr, hl, hr) = (slope[i - 1], slope[i], h[i - 1], h[i]);
            let dx = if monotone_x {
                pchip(dl.x, dr.x, hl, hr)
            } else {
                centered(dl.x, dr.x, hl, hr)
            };
            d[i] = Point::new(dx, centered(dl.r, dr.r, hl, hr));
        }
        if closed {
            let (dl, dr, hl, hr) = (slope[m - 1], slope[0], h[m - 1], h[0]);
            d[0] = Point::new(centered(dl.x, dr.x, hl, hr), centered(dl.r, dr.r, hl, hr));
            d[n - 1] = d[0];
        } else if m == 1 {
            d[0] = slope[0];
            d[1] = slope[0];
        } else {
            let end = |a: Point, b: Point, ha: f64, hb: f64| {
                let dx = if monotone_x {
                    pchip_end(a.x, b.x, ha, hb)
                } else {
                    end_derivative(a.x, b.x, ha, hb)
                };
                Point::new(dx, end_derivative(a.r, b.r, ha, hb))
            };
            d[0] = end(slope[0], slope[1], h[0], h[1]);
            d[n - 1] = end(slope[m - 1], slope[m - 2], h[m - 1], h[m - 2]);
        }
        Spline { pts, s, d }
    }

    fn segments(&self) -> usize {
        self.pts.len() - 1
    }

    /// Point on segment `j` at local parameter `t` in [0, 1].
    fn eval(&self, j: usize, t: f64) -> Point {
        if t == 0.0 {
            return self.pts[j];
        }
        if t == 1.0 {
            return self.pts[j + 1];
        }
        let h = self.s[j + 1] - self.s[j];
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.pts[j] * h00 + self.d[j] * (h10 * h) + self.pts[j + 1] * h01 + self.d[j + 1] * (h11 * h)
    }

    fn end(&self) -> Point {
        self.pts[self.pts.len() - 1]
    }

    /// From position `(j, t)` at point `from`, the next position along the
    /// spline at chord distance `c`; `None` if the spline ends first.
    fn march(&self, j: usize, t: f64, from: Point, c: f64) -> Option<(usize, f64, Point)> {
        let gap = |p: Point| p.dist(from) - c;
        let mut k = j;
        while k < self.segments() {
            if gap(self.pts[k + 1]) >= 0.0 {
                let t0 = if k == j { t } else { 0.0 };
                let tt = brent(|tt| gap(self.eval(k, tt)), t0, 1.0, 1e-15, 200).ok()?;
                return Some((k, tt, self.eval(k, tt)));
            }
            k += 1;
        }
        None
    }

    /// Signed mismatch after `segs - 1` chords of length `c`: positive when
    /// the chord is too short to reach the end.
    fn shortfall(&self, segs: usize, c: f64) -> (f64, Vec<Point>) {
        let mut out = Vec::with_capacity(segs + 1);
        let mut pos = (0usize, 0.0f64, self.pts[0]);
        out.push(pos.2);
        for done in 0..segs - 1 {
            match self.march(pos.0, pos.1, pos.2, c) {
                Some(p) => pos = p,
                None => return (-c * ((segs - 1 - done) as f64), out),
            }
            out.push(pos.2);
        }
        (pos.2.dist(self.end()) - c, out)
    }

    /// Equal-chord placement with `segs` segments; returns (chord, nodes).
    fn solve(&self, segs: usize, length: f64) -> Option<(f64, Vec<Point>)> {
        let guess = length / segs as f64;
        let mut lo = 0.5 * guess;
        let mut hi = 1.5 * guess;
        if segs == 1 {
            let c = self.pts[0].dist(self.end());
            return Some((c, vec![self.pts[0], self.end()]));
        }
        while self.shortfall(segs, lo).0 <= 0.0 {
            lo *= 0.5;
            if lo < 1e-6 * guess {
                return None;
            }
        }
        while self.shortfall(segs, hi).0 >= 0.0 {
            hi *= 1.5;
            if hi > 10.0 * guess {
                return None;
            }
        }
        let c = brent(|c| self.shortfall(segs, c).0, lo, hi, 1e-16 * guess, 200).ok()?;
        let (_, mut nodes) = self.shortfall(segs, c);
        nodes.push(self.end());
        Some((c, nodes))
    }
}

/// Number of nodes a resample of a curve of chord length `length` at
/// `spacing` is expected to have (before the exact minimality adjustment).
pub fn expected_segments(length: f64, spacing: f64) -> usize {
    ((length / spacing) - 1e-9).ceil().max(1.0) as usize
}

pub(crate) fn resample_points(
    pts: &[Point],
    closed: bool,
    monotone_x: bool,
    spacing: f64,
) -> Result<Vec<Point>, GeometryError> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(GeometryError::NonPositiveSpacing(spacing));
    }
    let length = if closed {
        polyline_length(pts) + pts[0].dist(pts[pts.len() - 1])
    } else {
        polyline_length(pts)
    };
    if spacing > length / MIN_NODES as f64 {
        return Err(GeometryError::SpacingTooLarge {
            spacing,
            limit: length / MIN_NODES as f64,
        });
    }
    let spline = Spline::new(pts, closed, monotone_x);
    // Smallest segment count whose equal chord does not exceed `spacing`.
    let mut segs = expected_segments(length, spacing);
    let mut best = spline
        .solve(segs, length)
        .ok_or(GeometryError::NonPositiveSpacing(spacing))?;
    while best.0 > spacing * (1.0 + 1e-12) {
        segs += 1;
        best = spline
            .solve(segs, length)
            .ok_or(GeometryError::NonPositiveSpacing(spacing))?;
    }
    while segs > 1 {
        match spline.solve(segs - 1, length) {
            Some(cand) if cand.0 <= spacing * (1.0 + 1e-12) => {
                segs -= 1;
                best = cand;
            }
            _ => break,
        }
    }
    let mut nodes = best.1;
    if closed {
        nodes.pop();
    }
    Ok(nodes)
}

/// Open-curve regrid at equal spline parameter, without the equal-chord
/// solve. Chords agree with `spacing` up to curvature effects of order
/// `spacing^2`; used inside time stepping where idempotence is not needed.
pub(crate) fn regrid_points(
    pts: &[Point],
    monotone_x: bool,
    spacing: f64,
) -> Result<Vec<Point>, GeometryError> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(GeometryError::NonPositiveSpacing(spacing));
    }
    let spline = Spline::new(pts, false, monotone_x);
    let total = spline.s[spline.s.len() - 1];
    if spacing > total / MIN_NODES as f64 {
        return Err(GeometryError::SpacingTooLarge {
            spacing,
            limit: total / MIN_NODES as f64,
        });
    }
    let segs = expected_segments(total, spacing);
    let mut out = Vec::with_capacity(segs + 1);
    out.push(spline.pts[0]);
    let mut j = 0;
    for k in 1..segs {
        let target = total * k as f64 / segs as f64;
        while spline.s[j + 1] < target {
            j += 1;
        }
        let t = (target - spline.s[j]) / (spline.s[j + 1] - spline.s[j]);
        out.push(spline.eval(j, t));
    }
    out.push(spline.end());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn quarter_circle() -> ParamCurve {
        ParamCurve::open(
            (0..=40)
                .map(|i| {
                    let th = FRAC_PI_2 * i as f64 / 40.0;
                    Point::new(th.cos(), th.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn straight_segment_node_count() {
        let seg = ParamCurve::open(vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)]).unwrap();
        let r = seg.resample(0.1).unwrap();
        assert_eq!(r.points.len(), 11);
        for (i, p) in r.points.iter().enumerate() {
            assert!((p.x - i as f64 * 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_circle_node_count() {
        let r = quarter_circle().resample(0.01).unwrap();
        let expect = (FRAC_PI_2 / 0.01).ceil() as i64 + 1;
        assert!((r.points.len() as i64 - expect).abs() <= 1, "{}", r.points.len());
        for p in &r.points {
            assert!((p.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn endpoints_are_exact_and_chords_equal() {
        let q = quarter_circle();
        let r = q.resample(0.05).unwrap();
        assert_eq!(r.points[0], q.points[0]);
        assert_eq!(r.points[r.points.len() - 1], q.points[q.points.len() - 1]);
        let chords: Vec<f64> = r.points.windows(2).map(|w| w[0].dist(w[1])).collect();
        for c in &chords {
            assert!((c - chords[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn idempotent_on_graph() {
        let g = ProfileGraph::from_fn(-3.0, 3.0, 37, [false, false], |x| 2.0 + x.sin() * 0.5).unwrap();
        let a = g.resample(0.07).unwrap();
        let b = a.resample(0.07).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.nodes().iter().zip(b.nodes()) {
            assert!(p.dist(*q) < 1e-12);
        }
    }

    #[test]
    fn closed_loop() {
        let c = ParamCurve::closed(
            (0..60)
                .map(|i| {
                    let th = std::f64::consts::TAU * i as f64 / 60.0;
                    Point::new(th.cos(), 3.0 + th.sin())
                })
                .collect(),
        )
        .unwrap();
        let r = c.resample(0.05).unwrap();
        assert!(r.closed);
        let n = r.points.len();
        let closing = r.points[n - 1].dist(r.points[0]);
        let first = r.points[0].dist(r.points[1]);
        assert!((closing - first).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_spacing() {
        let seg = ParamCurve::open(vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)]).unwrap();
        assert!(matches!(
            seg.resample(0.2),
            Err(GeometryError::SpacingTooLarge { .. })
        ));
        assert!(seg.resample(0.0).is_err());
    }

    #[test]
    fn graph_with_axis_caps_stays_graphical() {
        let nodes: Vec<Point> = (0..=50)
            .map(|i| {
                let th = std::f64::consts::PI * (1.0 - i as f64 / 50.0);
                Point::new(th.cos(), if i == 0 || i == 50 { 0.0 } else { th.sin() })
            })
            .collect();
        let g = ProfileGraph::new(nodes, [true, true]).unwrap();
        let r = g.resample(0.013).unwrap();
        r.check_invariants().unwrap();
        assert_eq!(r.nodes()[0], Point::new(-1.0, 0.0));
    }
}
