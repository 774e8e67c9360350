//! Two pancakes at axis gap `2 * gap_half` joined by a circular neck arc.
//!
//! The right pancake occupies `[gap_half, gap_half + w]` and the left one is
//! its mirror image. Everything below `r = rho` between the pancake centers
//! is carved away and replaced by the circle arc centered on `x = 0` that
//! meets the inner pancake sides tangentially at height `rho`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::curve::{Point, ProfileGraph};
use crate::error::{GeometryError, JoinError};
use crate::measure::{graph_polygon, point_in_polygon};
use crate::numeric::brent;
use crate::pancake::{mirror_join, sample_chain, PancakeShape, PancakeSpec, Piece};

/// The neck is specified either by carve height or by its minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeckParam {
    Rho(f64),
    M(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeckJoinSpec {
    pub pancake: PancakeSpec,
    pub neck: NeckParam,
    #[serde(default = "default_gap_half")]
    pub gap_half: f64,
}

fn default_gap_half() -> f64 {
    1.0
}

impl NeckJoinSpec {
    pub fn with_m(pancake: PancakeSpec, m: f64) -> Self {
        NeckJoinSpec {
            pancake,
            neck: NeckParam::M(m),
            gap_half: 1.0,
        }
    }

    pub fn with_rho(pancake: PancakeSpec, rho: f64) -> Self {
        NeckJoinSpec {
            pancake,
            neck: NeckParam::Rho(rho),
            gap_half: 1.0,
        }
    }

    /// The right pancake's analytic shape.
    pub fn right_pancake(&self) -> Result<PancakeShape, JoinError> {
        if !(self.gap_half > 0.0) {
            return Err(JoinError::GeometryInconsistent(format!(
                "gap_half must be positive, got {}",
                self.gap_half
            )));
        }
        Ok(self
            .pancake
            .shape(self.gap_half + 0.5 * self.pancake.width_w)?)
    }
}

/// Neck arc tangent to the right pancake at height `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckArc {
    pub rho: f64,
    /// Abscissa of the right tangency point.
    pub a: f64,
    pub center_r: f64,
    pub radius: f64,
    pub m: f64,
    /// Slope `du/dx` of the pancake side at the tangency point.
    pub slope: f64,
}

/// Closed-form tangent arc: with `t = 1 / slope`, the center sits at
/// height `rho + a t` and the radius is `a sqrt(1 + t^2)`.
pub fn neck_arc(shape: &PancakeShape, rho: f64) -> NeckArc {
    let (a, slope) = shape.left_side_at_height(rho);
    let t = 1.0 / slope;
    let hyp = (1.0 + t * t).sqrt();
    NeckArc {
        rho,
        a,
        center_r: rho + a * t,
        radius: a * hyp,
        m: rho - a / (t + hyp),
        slope,
    }
}

/// Neck minimum as a function of the carve height.
pub fn m_of_rho(spec: &NeckJoinSpec, rho: f64) -> Result<f64, JoinError> {
    let shape = spec.right_pancake()?;
    Ok(neck_arc(&shape, rho).m)
}

/// Carve height at which the neck arc touches the axis.
pub fn rho_floor(spec: &NeckJoinSpec) -> Result<f64, JoinError> {
    let shape = spec.right_pancake()?;
    let g = spec.pancake.girth_g;
    let f = |rho: f64| neck_arc(&shape, rho).m;
    let lo = 1e-9 * g;
    let hi = g * (1.0 - 1e-9);
    brent(f, lo, hi, 1e-14 * g, 200).map_err(|e| {
        JoinError::GeometryInconsistent(format!("no neck floor in (0, {g}): {e}"))
    })
}

/// Carve height producing neck minimum `m`.
pub fn rho_for_m(spec: &NeckJoinSpec, m: f64) -> Result<f64, JoinError> {
    let g = spec.pancake.girth_g;
    if !(m > 0.0 && m < g) {
        return Err(JoinError::OutOfRange {
            name: "m",
            value: m,
            lo: 0.0,
            hi: g,
        });
    }
    let shape = spec.right_pancake()?;
    let rho0 = rho_floor(spec)?;
    let f = |rho: f64| neck_arc(&shape, rho).m - m;
    brent(f, rho0, g * (1.0 - 1e-12), 1e-14 * g, 300)
        .map_err(|e| JoinError::GeometryInconsistent(format!("m = {m} not attained: {e}")))
}

/// Samples `m(rho)` on a uniform grid over `(rho_0, g)` and reports the
/// first decreasing pair.
pub fn check_m_monotone(spec: &NeckJoinSpec, samples: usize) -> Result<(), JoinError> {
    let g = spec.pancake.girth_g;
    let rho0 = rho_floor(spec)?;
    let shape = spec.right_pancake()?;
    let grid: Vec<f64> = (0..=samples)
        .map(|i| rho0 + (g - rho0) * (i as f64 / samples as f64).min(1.0 - 1e-9))
        .collect();
    for w in grid.windows(2) {
        if neck_arc(&shape, w[1]).m <= neck_arc(&shape, w[0]).m {
            return Err(JoinError::NotMonotone(w[0], w[1]));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JoinedProfile {
    pub curve: ProfileGraph,
    pub arc_center: Point,
    pub arc_radius: f64,
    pub m_achieved: f64,
    pub rho: f64,
    /// The x-interval covered by the neck arc.
    pub f_m_domain: (f64, f64),
    /// Angle between arc and pancake tangents at the splice (radians).
    pub tangent_mismatch: f64,
    pub spec: NeckJoinSpec,
}

/// Maximum admissible tangent mismatch at the splice points.
pub const TANGENCY_TOL: f64 = 1e-9;

/// Builds the glued profile with node spacing at most `spacing`.
pub fn join(spec: &NeckJoinSpec, spacing: f64) -> Result<JoinedProfile, JoinError> {
    spec.pancake.validate()?;
    let g = spec.pancake.girth_g;
    let rho = match spec.neck {
        NeckParam::Rho(rho) => {
            let rho0 = rho_floor(spec)?;
            if !(rho > rho0 && rho < g) {
                return Err(JoinError::OutOfRange {
                    name: "rho",
                    value: rho,
                    lo: rho0,
                    hi: g,
                });
            }
            rho
        }
        NeckParam::M(m) => rho_for_m(spec, m)?,
    };
    let shape = spec.right_pancake()?;
    let arc = neck_arc(&shape, rho);

    let arc_center = Point::new(0.0, arc.center_r);
    let cross = Point::new(arc.a, rho);
    let radial = cross - arc_center;
    let arc_dir = Point::new(-radial.r, radial.x);
    let tangent_mismatch = (arc_dir.r.atan2(arc_dir.x) - arc.slope.atan()).abs();
    if tangent_mismatch > TANGENCY_TOL || !tangent_mismatch.is_finite() {
        return Err(JoinError::Tangency(tangent_mismatch));
    }

    let mut pieces = vec![Piece::Arc {
        center: arc_center,
        radius: arc.radius,
        from: -FRAC_PI_2,
        to: radial.r.atan2(radial.x),
    }];
    pieces.extend(trim_rising(&shape.left_half(), rho, cross)?);
    pieces.extend(shape.right_half.iter().copied());

    let total: f64 = pieces.iter().map(Piece::length).sum();
    let segs = (total / spacing).ceil().max(8.0) as usize;
    let mut right = sample_chain(&pieces, segs);
    right[0] = Point::new(0.0, arc.m);
    let curve = mirror_join(&right, 0.0).map_err(|e| match e {
        GeometryError::NonMonotone { .. } => JoinError::Fold,
        other => JoinError::Geometry(other),
    })?;
    Ok(JoinedProfile {
        m_achieved: curve.height_at(0.0).unwrap_or(arc.m),
        curve,
        arc_center,
        arc_radius: arc.radius,
        rho,
        f_m_domain: (-arc.a, arc.a),
        tangent_mismatch,
        spec: spec.clone(),
    })
}

/// Drops the part of a rising piece chain below `rho`, starting the chain
/// exactly at `cross`.
fn trim_rising(pieces: &[Piece], rho: f64, cross: Point) -> Result<Vec<Piece>, JoinError> {
    let k = pieces
        .iter()
        .position(|p| p.end().r >= rho)
        .ok_or_else(|| JoinError::GeometryInconsistent(format!("no side at height {rho}")))?;
    let trimmed = match pieces[k] {
        Piece::Arc {
            center, radius, to, ..
        } => {
            // Rising arcs on the left side run through the second quadrant.
            let th = std::f64::consts::PI - ((rho - center.r) / radius).clamp(-1.0, 1.0).asin();
            Piece::Arc {
                center,
                radius,
                from: th,
                to,
            }
        }
        Piece::LogCos { c, top, a, x1, .. } => Piece::LogCos {
            c,
            top,
            a,
            x0: cross.x,
            x1,
        },
    };
    let start = trimmed.start();
    if start.dist(cross) > 1e-9 * (1.0 + cross.r) {
        return Err(JoinError::GeometryInconsistent(format!(
            "splice point mismatch {} at rho = {rho}",
            start.dist(cross)
        )));
    }
    let mut out = vec![trimmed];
    out.extend_from_slice(&pieces[k + 1..]);
    Ok(out)
}

/// True iff every node of `inner` lies in the closed region bounded by
/// `outer` and the axis, up to `outer`'s node spacing.
pub fn nesting_check(inner: &JoinedProfile, outer: &JoinedProfile) -> bool {
    let poly = graph_polygon(&outer.curve);
    let tol = outer.curve.length() / (outer.curve.len() - 1) as f64;
    inner
        .curve
        .nodes()
        .iter()
        .all(|&p| point_in_polygon(p, &poly, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{count_critical_points, default_plateau_tol};
    use crate::pancake::{make_pancake, CapStyle};

    fn desk() -> PancakeSpec {
        PancakeSpec::desk()
    }

    /// Independent oracle: intersect the tangent line normal with x = 0
    /// numerically and bisect on the resulting arc minimum.
    fn oracle_m(shape: &PancakeShape, rho: f64) -> f64 {
        let (a, _) = shape.left_side_at_height(rho);
        let e = 1e-7;
        let slope = (shape.height(a + e).unwrap() - shape.height(a - e).unwrap()) / (2.0 * e);
        // Normal line: (a, rho) + lambda (-slope, 1); hits x = 0 at lambda = a / slope.
        let center = rho + a / slope;
        let radius = (a * a + (center - rho).powi(2)).sqrt();
        center - radius
    }

    #[test]
    fn rho_floor_matches_bisection_oracle() {
        for style in [CapStyle::Semicircle, CapStyle::GrimReaper] {
            let spec = NeckJoinSpec::with_rho(
                PancakeSpec {
                    cap_style: style,
                    ..desk()
                },
                1.0,
            );
            let shape = spec.right_pancake().unwrap();
            let rho0 = rho_floor(&spec).unwrap();
            assert!(m_of_rho(&spec, rho0).unwrap().abs() < 1e-8);
            assert!(m_of_rho(&spec, rho0 + 0.1).unwrap() > 0.0);
            let (mut lo, mut hi) = (1e-6, 19.999);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if oracle_m(&shape, mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((rho0 - lo).abs() < 1e-5, "{style:?}: {rho0} vs {lo}");
        }
    }

    #[test]
    fn join_is_symmetric_and_tangent() {
        let spec = NeckJoinSpec::with_rho(desk(), 10.0);
        let j = join(&spec, 0.05).unwrap();
        assert!(j.tangent_mismatch < 1e-9);
        let nodes = j.curve.nodes();
        let n = nodes.len();
        for i in 0..n {
            assert!((nodes[i].x + nodes[n - 1 - i].x).abs() <= 1e-12 * nodes[i].x.abs().max(1.0));
            assert_eq!(nodes[i].r, nodes[n - 1 - i].r);
        }
        for k in 1..50 {
            let x = j.f_m_domain.1 * k as f64 / 50.0;
            let a = j.curve.height_at(x).unwrap();
            let b = j.curve.height_at(-x).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(j.m_achieved, j.curve.height_at(0.0).unwrap());
    }

    #[test]
    fn requested_minima_are_met_and_nested() {
        let joins: Vec<_> = [0.5, 1.0, 1.5]
            .iter()
            .map(|&m| join(&NeckJoinSpec::with_m(desk(), m), 0.05).unwrap())
            .collect();
        for (j, m) in joins.iter().zip([0.5, 1.0, 1.5]) {
            assert!((j.m_achieved - m).abs() < 1e-8, "{} vs {m}", j.m_achieved);
        }
        assert!(nesting_check(&joins[0], &joins[1]));
        assert!(nesting_check(&joins[1], &joins[2]));
        assert!(nesting_check(&joins[0], &joins[2]));
        assert!(nesting_check(&joins[0], &joins[0]));
        assert!(!nesting_check(&joins[2], &joins[0]));
    }

    #[test]
    fn critical_points_two_max_one_min() {
        for m in [0.05, 0.5, 3.0, 12.0, 18.0] {
            let j = join(&NeckJoinSpec::with_m(desk(), m), 0.05).unwrap();
            let cp = count_critical_points(&j.curve, default_plateau_tol(&j.curve));
            assert_eq!((cp.maxima, cp.minima), (2, 1), "m = {m}");
            j.curve.check_invariants().unwrap();
        }
    }

    #[test]
    fn m_monotone_in_rho() {
        check_m_monotone(&NeckJoinSpec::with_m(desk(), 1.0), 400).unwrap();
        let grim = PancakeSpec {
            cap_style: CapStyle::GrimReaper,
            ..desk()
        };
        check_m_monotone(&NeckJoinSpec::with_m(grim, 1.0), 400).unwrap();
    }

    #[test]
    fn pancakes_lie_inside_joined_region() {
        let spec = NeckJoinSpec::with_m(desk(), 0.8);
        let j = join(&spec, 0.05).unwrap();
        let c = 1.0 + 0.5 * desk().width_w;
        let poly = graph_polygon(&j.curve);
        for center in [c, -c] {
            let p = make_pancake(&desk(), center, 0.05).unwrap();
            assert!(p.nodes().iter().all(|&q| point_in_polygon(q, &poly, 0.05)));
        }
    }

    #[test]
    fn arc_bends_harder_than_face() {
        let spec = NeckJoinSpec::with_m(desk(), 1.0);
        let shape = spec.right_pancake().unwrap();
        let contact_r = shape.right_half[0].end().r;
        for m in [0.2, 1.0, 2.0, 4.0] {
            let rho = rho_for_m(&spec, m).unwrap();
            if rho < contact_r {
                let arc = neck_arc(&shape, rho);
                assert!(1.0 / arc.radius > shape.curvature_at_height(rho), "m = {m}");
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let err = join(&NeckJoinSpec::with_m(desk(), 25.0), 0.05).unwrap_err();
        assert!(matches!(err, JoinError::OutOfRange { name: "m", .. }));
        let err = join(&NeckJoinSpec::with_m(desk(), -1.0), 0.05).unwrap_err();
        assert!(matches!(err, JoinError::OutOfRange { .. }));
        let err = join(&NeckJoinSpec::with_rho(desk(), 0.01), 0.05).unwrap_err();
        assert!(matches!(err, JoinError::OutOfRange { name: "rho", .. }));
    }

    #[test]
    fn rho_floor_symmetric_under_reflection() {
        // Reflection maps the configuration to itself, so the left-side
        // tangency gives the same floor as the right.
        let spec = NeckJoinSpec::with_m(desk(), 1.0);
        let rho0 = rho_floor(&spec).unwrap();
        let j = join(&NeckJoinSpec::with_rho(desk(), rho0 + 0.5), 0.05).unwrap();
        let left = j.curve.reflected(0.0);
        for (p, q) in left.nodes().iter().zip(j.curve.nodes()) {
            assert!(p.dist(*q) < 1e-12);
        }
    }
}
