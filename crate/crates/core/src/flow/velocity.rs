//! Node velocities for the forced curve-shortening flow
//! `d gamma / dt = -(kappa + (n - 1) cos(theta) / r) nu`.

use crate::curve::{Point, ProfileGraph};
use crate::error::GeometryError;
use crate::measure::{circle_tangent, menger_curvature};

/// Geodesic curvature at the middle of three points of a left-to-right
/// profile (positive where the enclosed region is convex).
#[inline]
fn kappa(a: Point, p: Point, b: Point) -> f64 {
    -menger_curvature(a, p, b)
}

/// Normal speed `kappa + (n - 1) nu_r / r` and outward normal at an interior node.
///
/// The normal is the left normal of the traversal direction `a -> p -> b`.
#[inline]
pub fn interior_speed(a: Point, p: Point, b: Point, n: f64) -> (f64, Point) {
    let nu = circle_tangent(a, p, b).perp();
    (kappa(a, p, b) + (n - 1.0) * nu.r / p.r, nu)
}

/// Reflection of the neighbor of an axis endpoint through the axis.
#[inline]
fn axis_ghost(q: Point) -> Point {
    Point::new(q.x, -q.r)
}

/// Reflection of the neighbor of an open endpoint through `x = end.x`.
#[inline]
fn wall_ghost(end: Point, q: Point) -> Point {
    Point::new(2.0 * end.x - q.x, q.r)
}

/// Tip curvature at an axis endpoint, using the reflected neighbor.
pub fn tip_curvature(nodes: &[Point], left: bool) -> f64 {
    let m = nodes.len();
    if left {
        kappa(axis_ghost(nodes[1]), nodes[0], nodes[1])
    } else {
        kappa(nodes[m - 2], nodes[m - 1], axis_ghost(nodes[m - 2]))
    }
}

/// Velocity vectors of all nodes of a component.
///
/// Axis endpoints move along the axis with the regularized tip speed
/// `n kappa`; open endpoints stay at fixed `x` and move vertically.
pub fn node_velocities(nodes: &[Point], closed_ends: [bool; 2], n: usize, out: &mut Vec<Point>) {
    let m = nodes.len();
    let nf = n as f64;
    out.clear();
    out.resize(m, Point::new(0.0, 0.0));
    for i in 1..m - 1 {
        let (v, nu) = interior_speed(nodes[i - 1], nodes[i], nodes[i + 1], nf);
        out[i] = nu * (-v);
    }
    out[0] = if closed_ends[0] {
        Point::new(nf * tip_curvature(nodes, true), 0.0)
    } else {
        let ghost = wall_ghost(nodes[0], nodes[1]);
        let (v, _) = interior_speed(ghost, nodes[0], nodes[1], nf);
        Point::new(0.0, -v)
    };
    out[m - 1] = if closed_ends[1] {
        Point::new(-nf * tip_curvature(nodes, false), 0.0)
    } else {
        let ghost = wall_ghost(nodes[m - 1], nodes[m - 2]);
        let (v, _) = interior_speed(nodes[m - 2], nodes[m - 1], ghost, nf);
        Point::new(0.0, -v)
    };
}

/// Speed at one node of a graph.
///
/// At interior nodes this is the graph rate `du/dt = u_xx / (1 + u_x^2) - (n - 1) / u`
/// expressed through the normal speed; at axis endpoints it is the inward
/// tip speed `n kappa_tip`; at open endpoints the vertical rate.
pub fn velocity(component: &ProfileGraph, index: usize, n: usize) -> Result<f64, GeometryError> {
    let nodes = component.nodes();
    let m = nodes.len();
    if index >= m {
        return Err(GeometryError::NeedsInteriorNode { index, len: m });
    }
    let nf = n as f64;
    let closed = component.closed_ends();
    if index == 0 || index == m - 1 {
        let left = index == 0;
        if closed[if left { 0 } else { 1 }] {
            return Ok(nf * tip_curvature(nodes, left));
        }
        let (a, p, b) = if left {
            (wall_ghost(nodes[0], nodes[1]), nodes[0], nodes[1])
        } else {
            (nodes[m - 2], nodes[m - 1], wall_ghost(nodes[m - 1], nodes[m - 2]))
        };
        return Ok(-interior_speed(a, p, b, nf).0);
    }
    let (a, p, b) = (nodes[index - 1], nodes[index], nodes[index + 1]);
    if !(p.r > 0.0) {
        return Err(GeometryError::NegativeHeight { index });
    }
    let (v, nu) = interior_speed(a, p, b, nf);
    // Vertical rate at fixed x: -V / nu_r = -V sqrt(1 + u_x^2).
    Ok(-v / nu.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn semicircle(radius: f64, count: usize) -> ProfileGraph {
        let mut nodes: Vec<Point> = (0..count)
            .map(|i| {
                let th = PI * (1.0 - i as f64 / (count - 1) as f64);
                Point::new(radius * th.cos(), radius * th.sin())
            })
            .collect();
        nodes[0].r = 0.0;
        nodes[count - 1].r = 0.0;
        ProfileGraph::new(nodes, [true, true]).unwrap()
    }

    #[test]
    fn cylinder_rate() {
        let g = ProfileGraph::from_fn(-1.0, 1.0, 21, [false, false], |_| 4.0).unwrap();
        for i in [0, 7, 20] {
            assert!((velocity(&g, i, 3).unwrap() + 2.0 / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_top_and_tip() {
        let g = semicircle(2.0, 201);
        // Top of the round sphere moves inward with speed H = n / R.
        assert!((velocity(&g, 100, 3).unwrap() + 1.5).abs() < 1e-12);
        assert!((velocity(&g, 0, 3).unwrap() - 1.5).abs() < 1e-12);
        let mut out = Vec::new();
        node_velocities(g.nodes(), [true, true], 3, &mut out);
        for (p, v) in g.nodes().iter().zip(&out) {
            // Radial inward motion of speed n / R everywhere.
            let radial = p.dot(*v) / p.norm();
            assert!((radial + 1.5).abs() < 1e-9);
        }
    }
}
