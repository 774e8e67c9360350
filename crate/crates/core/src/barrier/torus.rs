//! Rotationally symmetric shrinking torus, found as a closed geodesic of the
//! weighted half-plane metric by shooting from the `r`-axis.
//!
//! In arc length with tangent `(cos φ, sin φ)` the shrinker equation
//! `kappa + (n - 1) nu_r / r = <p, nu> / 2` reads
//! `φ' = (x / 2) sin φ + cos φ ((n - 1) / r - r / 2)`.

use serde::{Deserialize, Serialize};

use crate::curve::{ParamCurve, Point};
use crate::error::BarrierError;
use crate::measure::shoelace;
use crate::numeric::{brent, integrate_to_event, rk4_step, OdeOptions};

const SCAN_LO: f64 = 0.5;
const SCAN_HI: f64 = 4.0;
const SCAN_STEP: f64 = 0.05;
const MAX_ARC: f64 = 60.0;

/// The time `-1` slice of the shrinking torus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusShrinker {
    pub n: usize,
    /// Closed profile, traversed clockwise.
    pub curve: ParamCurve,
    /// Heights where the profile crosses `x = 0`.
    pub r_inner: f64,
    pub r_outer: f64,
    /// `|sin φ|` at the return to `x = 0`.
    pub closure_residual: f64,
    /// Sup-norm of `kappa + (n - 1) nu_r / r - <p, nu> / 2` over the nodes.
    pub shrinker_residual: f64,
}

fn rhs(n: usize) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    let k = n as f64 - 1.0;
    move |_, y| {
        let (x, r, phi) = (y[0], y[1], y[2]);
        let (s, c) = phi.sin_cos();
        [c, s, 0.5 * x * s + c * (k / r - 0.5 * r)]
    }
}

/// Shoots from `(0, r0)` heading in `+x` and returns the arc length and
/// state at the first return to `x = 0`.
fn shoot(n: usize, r0: f64) -> Option<(f64, [f64; 3])> {
    let opts = OdeOptions {
        rtol: 1e-13,
        atol: 1e-13,
        h_init: 1e-3,
        h_max: 0.05,
        max_steps: 200_000,
    };
    integrate_to_event(
        rhs(n),
        [0.0, r0, 0.0],
        MAX_ARC,
        opts,
        0.0,
        |y| y[0],
        |y| y[1] < 1e-3 || y[0].hypot(y[1]) > 20.0,
    )
    .map(|hit| (hit.s, hit.y))
}

/// Perpendicularity defect at the return, defined only for returns heading
/// in `-x`.
fn defect(n: usize, r0: f64) -> Option<f64> {
    shoot(n, r0).and_then(|(_, y)| (y[2].cos() < 0.0).then(|| y[2].sin()))
}

/// Solves for the shrinking torus and samples it with about `nodes` points.
pub fn torus_shrinker_profile(n: usize, nodes: usize) -> Result<TorusShrinker, BarrierError> {
    if n < 2 {
        return Err(BarrierError::Parameter(format!("dimension n = {n} must be at least 2")));
    }
    if nodes < 16 {
        return Err(BarrierError::Parameter(format!("need at least 16 nodes, got {nodes}")));
    }
    let steps = ((SCAN_HI - SCAN_LO) / SCAN_STEP).round() as usize;
    let grid: Vec<(f64, Option<f64>)> = (0..=steps)
        .map(|i| {
            let r0 = SCAN_LO + SCAN_STEP * i as f64;
            (r0, defect(n, r0))
        })
        .collect();
    let bracket_fail = BarrierError::Bracket {
        lo: SCAN_LO,
        hi: SCAN_HI,
    };
    let mut root = None;
    for w in grid.windows(2) {
        if let ((a, Some(fa)), (b, Some(fb))) = (w[0], w[1]) {
            if fa * fb > 0.0 {
                continue;
            }
            let f = |r0: f64| defect(n, r0).unwrap_or(f64::NAN);
            if let Ok(r0) = brent(f, a, b, 1e-15, 200) {
                if f(r0).abs() < 1e-8 {
                    root = Some(r0);
                    break;
                }
            }
        }
    }
    let r0 = root.ok_or(bracket_fail.clone())?;
    let (s_end, end) = shoot(n, r0).ok_or(bracket_fail)?;
    let closure_residual = end[2].sin().abs();

    // Resample the half loop with fixed steps so the nodes are equally
    // spaced in arc length, then mirror it across x = 0.
    let half = (nodes / 2).max(8);
    let h = s_end / half as f64;
    let f = rhs(n);
    let mut y = [0.0, r0, 0.0];
    let mut pts = Vec::with_capacity(2 * half);
    pts.push(Point::new(0.0, r0));
    for k in 0..half {
        y = rk4_step(&f, k as f64 * h, &y, h);
        pts.push(Point::new(y[0], y[1]));
    }
    pts[half].x = 0.0;
    let r1 = pts[half].r;
    for k in (1..half).rev() {
        let p = pts[k];
        pts.push(Point::new(-p.x, p.r));
    }
    if shoelace(&pts) > 0.0 {
        pts.reverse();
    }
    let curve = ParamCurve::closed(pts)?;
    let shrinker_residual = shrinker_residual(&curve.points, n);
    Ok(TorusShrinker {
        n,
        curve,
        r_inner: r0.min(r1),
        r_outer: r0.max(r1),
        closure_residual,
        shrinker_residual,
    })
}

/// Sup-norm of the shrinker equation residual on a closed loop sampled at
/// equal arc length, using fourth-order periodic differences.
pub fn shrinker_residual(pts: &[Point], n: usize) -> f64 {
    let m = pts.len();
    let at = |i: isize| pts[i.rem_euclid(m as isize) as usize];
    let k = n as f64 - 1.0;
    let mut worst = 0.0_f64;
    for i in 0..m as isize {
        let (a, b, p, c, d) = (at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2));
        // Derivatives in the node index; the curvature is invariant under
        // the constant rescaling to arc length.
        let d1 = (a - d + (c - b) * 8.0) * (1.0 / 12.0);
        let d2 = (-a - d + (b + c) * 16.0 - p * 30.0) * (1.0 / 12.0);
        let speed = d1.norm();
        let kappa_ccw = d1.cross(d2) / speed.powi(3);
        let nu = (d1 * (1.0 / speed)).perp();
        let v = -kappa_ccw + k * nu.r / p.r;
        worst = worst.max((v - 0.5 * p.dot(nu)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closes_in_dimension_two() {
        let t = torus_shrinker_profile(2, 4000).unwrap();
        assert!(t.closure_residual < 1e-8);
        assert!(t.shrinker_residual < 1e-6, "{}", t.shrinker_residual);
        assert!(t.r_inner > 0.0 && t.r_inner < 2f64.sqrt() && t.r_outer > 2f64.sqrt());
    }

    #[test]
    fn residual_detects_a_circle_that_is_not_a_shrinker() {
        // Circle of radius 1 around (0, 3): far from the shrinker equation.
        let pts: Vec<Point> = (0..400)
            .map(|i| {
                let th = -std::f64::consts::TAU * i as f64 / 400.0;
                Point::new(th.cos(), 3.0 + th.sin())
            })
            .collect();
        assert!(shrinker_residual(&pts, 2) > 0.1);
    }
}
