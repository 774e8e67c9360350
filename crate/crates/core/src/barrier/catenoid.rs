//! Catenoids of dimension `n >= 3`, which are trapped in a slab.
//!
//! The profile branches are `x(r) = ±c ∫_1^{r/c} ds / sqrt(s^(2(n-1)) - 1)`.
//! With `s = 1 + σ²` the integrand becomes
//! `2σ / sqrt((1 + σ²)^(2(n-1)) - 1)`, which is smooth at `σ = 0`.

use crate::curve::{ParamCurve, Point};
use crate::error::BarrierError;
use crate::numeric::{adaptive_simpson, brent, gauss_legendre};

fn check(n: usize, c: f64) -> Result<(), BarrierError> {
    if n == 2 {
        return Err(BarrierError::EntireCatenoid);
    }
    if n < 2 {
        return Err(BarrierError::Parameter(format!("dimension n = {n} must be at least 3")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(BarrierError::Parameter(format!("neck radius c = {c} must be positive")));
    }
    Ok(())
}

/// `dx/dσ` for the unit catenoid, written as `2 / sqrt(((1 + σ²)^k - 1) / σ²)`
/// with `k = 2 (n - 1)` so that no cancellation occurs near the neck.
fn x_rate(n: usize, sigma: f64) -> f64 {
    let k = 2.0 * (n as f64 - 1.0);
    let s2 = sigma * sigma;
    let ratio = if s2 == 0.0 {
        k
    } else {
        (k * s2.ln_1p()).exp_m1() / s2
    };
    2.0 / ratio.sqrt()
}

/// Arc-length rate `|d(x, r)/dσ|` for the unit catenoid.
fn arc_rate(n: usize, sigma: f64) -> f64 {
    x_rate(n, sigma).hypot(2.0 * sigma)
}

/// Asymptotic half-width `x(∞)` of the catenoid with neck radius `c`.
///
/// The integral is split at `s = 2`; the part over `[1, 2]` uses the σ
/// substitution and the tail uses `v = 1/s`, whose integrand
/// `v^(n-3) / sqrt(1 - v^(2(n-1)))` is smooth on `[0, 1/2]`.
pub fn catenoid_half_width(n: usize, c: f64) -> Result<f64, BarrierError> {
    check(n, c)?;
    let head = adaptive_simpson(|s| x_rate(n, s), 0.0, 1.0, 1e-14);
    let k = 2 * (n as i32 - 1);
    let tail = adaptive_simpson(
        |v| v.powi(n as i32 - 3) / (1.0 - v.powi(k)).sqrt(),
        0.0,
        0.5,
        1e-14,
    );
    Ok(c * (head + tail))
}

/// Both branches of the catenoid profile joined at the neck `(0, c)`,
/// truncated at height `r_max` and sampled with `nodes` points equally
/// spaced in arc length, ordered left to right.
pub fn catenoid_profile(n: usize, c: f64, r_max: f64, nodes: usize) -> Result<ParamCurve, BarrierError> {
    check(n, c)?;
    if !(r_max > c) {
        return Err(BarrierError::Parameter(format!(
            "r_max = {r_max} must exceed the neck radius {c}"
        )));
    }
    if nodes < 9 {
        return Err(BarrierError::Parameter(format!("need at least 9 nodes, got {nodes}")));
    }
    let sigma_max = (r_max / c - 1.0).sqrt();
    // Fine tabulation of x(σ) and arc length L(σ) on the unit catenoid.
    let panels = 8 * nodes;
    let ds = sigma_max / panels as f64;
    let mut xs = vec![0.0; panels + 1];
    let mut ls = vec![0.0; panels + 1];
    for k in 0..panels {
        let (a, b) = (k as f64 * ds, (k + 1) as f64 * ds);
        xs[k + 1] = xs[k] + gauss_legendre(|s| x_rate(n, s), a, b, 1);
        ls[k + 1] = ls[k] + gauss_legendre(|s| arc_rate(n, s), a, b, 1);
    }
    let half_len = ls[panels];
    // Nodes at equal arc length: `half` steps on each branch.
    let half = (nodes - 1) / 2;
    let mut branch = Vec::with_capacity(half + 1);
    let mut k = 0;
    for i in 0..=half {
        let target = half_len * i as f64 / half as f64;
        while k + 1 < panels && ls[k + 1] < target {
            k += 1;
        }
        let a = k as f64 * ds;
        let sigma = if i == half {
            sigma_max
        } else {
            let g = |s: f64| ls[k] + gauss_legendre(|t| arc_rate(n, t), a, s, 1) - target;
            brent(g, a, a + ds, 1e-15, 100).unwrap_or(a)
        };
        let x = xs[k] + gauss_legendre(|t| x_rate(n, t), a, sigma, 1);
        branch.push(Point::new(c * x, c * (1.0 + sigma * sigma)));
    }
    let mut points: Vec<Point> = branch.iter().rev().map(|p| Point::new(-p.x, p.r)).collect();
    points.extend(branch.into_iter().skip(1));
    Ok(ParamCurve::open(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::interior_speed;

    #[test]
    fn neck_and_symmetry() {
        let cat = catenoid_profile(3, 1.5, 4.0, 401).unwrap();
        let p = &cat.points;
        assert_eq!(p.len(), 401);
        assert!((p[200].x).abs() < 1e-15 && (p[200].r - 1.5).abs() < 1e-15);
        for i in 0..p.len() {
            let q = p[p.len() - 1 - i];
            assert!((p[i].x + q.x).abs() < 1e-12 && (p[i].r - q.r).abs() < 1e-12);
        }
        assert!((p[0].r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn minimal_speed_vanishes() {
        let cat = catenoid_profile(3, 1.0, 3.0, 10_001).unwrap();
        let worst = cat
            .points
            .windows(3)
            .map(|w| interior_speed(w[0], w[1], w[2], 3.0).0.abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn entire_in_dimension_two() {
        assert_eq!(catenoid_profile(2, 1.0, 3.0, 101), Err(BarrierError::EntireCatenoid));
        assert_eq!(catenoid_half_width(2, 1.0), Err(BarrierError::EntireCatenoid));
    }
}
