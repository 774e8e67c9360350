//! Synthetic pancake profiles and the width/girth asymptotics of the ancient
//! pancake.
//!
//! A pancake occupies a slab `|x - c| <= w/2` and reaches height `g` at its
//! rim. Its profile is a graph over the axis that meets the axis
//! orthogonally at both slab faces.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::curve::{Point, ProfileGraph};
use crate::error::PancakeError;
use crate::flow::{evolve, FlowConfig, Status};
use crate::numeric::brent;

/// Earliest construction time for which the asymptotic girth law is used.
pub const ASYMPTOTIC_LIMIT: f64 = -10.0;

/// `g(t) = -t + (n - 1) ln(-t) + c_n`, valid for `t <= -10`.
pub fn girth_asymptotic(t: f64, n: usize, c_n: f64) -> Result<f64, PancakeError> {
    if !(t <= ASYMPTOTIC_LIMIT) {
        return Err(PancakeError::AsymptoticRegime { t });
    }
    Ok(girth_law(t, n, c_n))
}

/// The girth law without the asymptotic-regime guard.
pub fn girth_law(t: f64, n: usize, c_n: f64) -> f64 {
    -t + (n as f64 - 1.0) * (-t).ln() + c_n
}

/// The limiting slab width `2 pi` (independent of `n`).
pub fn width_asymptotic(_n: usize) -> f64 {
    TAU
}

/// Inverts the girth law: the time `t < -1` at which `girth_law(t) = g`.
pub fn time_for_girth(g: f64, n: usize, c_n: f64) -> Option<f64> {
    let f = |t: f64| girth_law(t, n, c_n) - g;
    // The law is increasing in -t for -t > n - 1.
    let lo = -(n as f64).max(1.0 + 1e-9);
    let hi = -(g.abs() + 10.0 * n as f64 + c_n.abs() + 10.0);
    if f(lo) > 0.0 {
        return None;
    }
    brent(f, hi, lo, 1e-13, 200).ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapStyle {
    Semicircle,
    GrimReaper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PancakeSpec {
    pub n: usize,
    pub s: f64,
    pub width_w: f64,
    pub girth_g: f64,
    pub c_n: f64,
    pub cap_style: CapStyle,
}

impl PancakeSpec {
    /// Pancake at construction time `s` from the asymptotic laws.
    pub fn at_time(n: usize, s: f64, c_n: f64, cap_style: CapStyle) -> Result<Self, PancakeError> {
        let spec = PancakeSpec {
            n,
            s,
            width_w: width_asymptotic(n),
            girth_g: girth_asymptotic(s, n, c_n)?,
            c_n,
            cap_style,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Desk-scale default: `g = 20`, `w = 2 pi`, `n = 3`, semicircle caps.
    pub fn desk() -> Self {
        let g = 20.0;
        PancakeSpec {
            n: 3,
            s: time_for_girth(g, 3, 0.0).expect("girth law invertible at g = 20"),
            width_w: TAU,
            girth_g: g,
            c_n: 0.0,
            cap_style: CapStyle::Semicircle,
        }
    }

    pub fn validate(&self) -> Result<(), PancakeError> {
        if self.n < 2 {
            return Err(PancakeError::Dimension(self.n));
        }
        if !(self.s < 0.0) {
            return Err(PancakeError::NonNegativeTime(self.s));
        }
        if !(self.width_w > 0.0 && self.girth_g > self.width_w) {
            return Err(PancakeError::Degenerate {
                girth: self.girth_g,
                width: self.width_w,
            });
        }
        Ok(())
    }

    pub fn shape(&self, center_x: f64) -> Result<PancakeShape, PancakeError> {
        self.validate()?;
        Ok(PancakeShape::new(self, center_x))
    }
}

/// One analytic piece of a profile, parametrized by arc length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    /// Circle arc from angle `from` to angle `to` (radians, either direction).
    Arc {
        center: Point,
        radius: f64,
        from: f64,
        to: f64,
    },
    /// `r = top + a ln cos((x - c) / a)` for `x` between `x0` and `x1`.
    LogCos {
        c: f64,
        top: f64,
        a: f64,
        x0: f64,
        x1: f64,
    },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Arc {
                radius, from, to, ..
            } => radius * (to - from).abs(),
            Piece::LogCos { c, a, x0, x1, .. } => {
                (logcos_arclength(x1 - c, a) - logcos_arclength(x0 - c, a)).abs()
            }
        }
    }

    /// Point at arc length `s` from the start of the piece.
    pub fn point_at(&self, s: f64) -> Point {
        match *self {
            Piece::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let th = from + (to - from).signum() * s / radius;
                center + Point::new(radius * th.cos(), radius * th.sin())
            }
            Piece::LogCos { c, top, a, x0, x1 } => {
                let s0 = logcos_arclength(x0 - c, a);
                let dir = (x1 - x0).signum();
                let x = c + a * ((s0 + dir * s) / a).sinh().atan();
                Point::new(x, top + a * ((x - c) / a).cos().ln())
            }
        }
    }

    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        self.point_at(self.length())
    }
}

/// Signed arc length of the log-cos graph from its apex to offset `dx`.
fn logcos_arclength(dx: f64, a: f64) -> f64 {
    a * (dx / a).tan().asinh()
}

/// Samples a chain of pieces at uniform arc length with `segments` segments.
pub(crate) fn sample_chain(pieces: &[Piece], segments: usize) -> Vec<Point> {
    let lengths: Vec<f64> = pieces.iter().map(Piece::length).collect();
    let total: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(segments + 1);
    let mut piece = 0;
    let mut offset = 0.0;
    for k in 0..=segments {
        let s = total * k as f64 / segments as f64;
        while piece + 1 < pieces.len() && s > offset + lengths[piece] {
            offset += lengths[piece];
            piece += 1;
        }
        out.push(pieces[piece].point_at((s - offset).clamp(0.0, lengths[piece])));
    }
    out[segments] = pieces[pieces.len() - 1].end();
    out
}

/// Analytic pancake profile centered at `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct PancakeShape {
    pub center: f64,
    pub width: f64,
    pub girth: f64,
    /// Right half of the profile, from the apex down to the axis.
    pub right_half: Vec<Piece>,
    kind: ShapeKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ShapeKind {
    /// Rim circle of radius `rim` centered `(c, g - rim)` and face circles of
    /// radius `face` centered on the axis.
    Rounded { rim: f64, face: f64 },
    LogCos { a: f64 },
}

/// Rim radius of the rounded cap as a fraction of the width.
pub const RIM_FRACTION: f64 = 0.45;

impl PancakeShape {
    fn new(spec: &PancakeSpec, center: f64) -> Self {
        let (w, g) = (spec.width_w, spec.girth_g);
        match spec.cap_style {
            CapStyle::Semicircle => {
                let rim = RIM_FRACTION * w;
                let face = ((g - rim).powi(2) + 0.25 * w * w - rim * rim) / (w - 2.0 * rim);
                let rim_c = Point::new(center, g - rim);
                let face_c = Point::new(center + 0.5 * w - face, 0.0);
                // Internal tangency: the contact lies on the ray from the face
                // center through the rim center, extended by the rim radius.
                let dir = rim_c - face_c;
                let contact_angle = dir.r.atan2(dir.x);
                let right_half = vec![
                    Piece::Arc {
                        center: rim_c,
                        radius: rim,
                        from: 0.5 * PI,
                        to: contact_angle,
                    },
                    Piece::Arc {
                        center: face_c,
                        radius: face,
                        from: contact_angle,
                        to: 0.0,
                    },
                ];
                PancakeShape {
                    center,
                    width: w,
                    girth: g,
                    right_half,
                    kind: ShapeKind::Rounded { rim, face },
                }
            }
            CapStyle::GrimReaper => {
                // u(c + w/2) = 0 fixes the log-cos scale.
                let half = 0.5 * w;
                let f = |a: f64| g + a * (half / a).cos().ln();
                let a = brent(f, half / (0.5 * PI) * (1.0 + 1e-15), 1e6 * w, 1e-14, 300)
                    .expect("log-cos scale bracketed");
                PancakeShape {
                    center,
                    width: w,
                    girth: g,
                    right_half: vec![Piece::LogCos {
                        c: center,
                        top: g,
                        a,
                        x0: center,
                        x1: center + half,
                    }],
                    kind: ShapeKind::LogCos { a },
                }
            }
        }
    }

    pub fn left_end(&self) -> f64 {
        self.center - 0.5 * self.width
    }

    pub fn right_end(&self) -> f64 {
        self.center + 0.5 * self.width
    }

    /// Height of the profile at `x`, `None` outside the slab.
    pub fn height(&self, x: f64) -> Option<f64> {
        let d = (x - self.center).abs();
        if d > 0.5 * self.width {
            return None;
        }
        Some(match self.kind {
            ShapeKind::Rounded { rim, face } => {
                let contact = self.right_half[0].end();
                let dc = contact.x - self.center;
                if d <= dc {
                    self.girth - rim + (rim * rim - d * d).max(0.0).sqrt()
                } else {
                    let fx = 0.5 * self.width - face;
                    (face * face - (d - fx).powi(2)).max(0.0).sqrt()
                }
            }
            ShapeKind::LogCos { a } => self.girth + a * (d / a).cos().ln(),
        })
    }

    /// Slope `du/dx` of the left (rising) side at height `rho`, together
    /// with the abscissa there. `rho` must lie in `(0, g)`.
    pub fn left_side_at_height(&self, rho: f64) -> (f64, f64) {
        let d = match self.kind {
            ShapeKind::Rounded { rim, face } => {
                let contact = self.right_half[0].end();
                if rho >= contact.r {
                    let dr = rho - (self.girth - rim);
                    (rim * rim - dr * dr).max(0.0).sqrt()
                } else {
                    let fx = 0.5 * self.width - face;
                    fx + (face * face - rho * rho).max(0.0).sqrt()
                }
            }
            ShapeKind::LogCos { a } => a * ((rho - self.girth) / a).exp().acos(),
        };
        let slope = match self.kind {
            ShapeKind::Rounded { rim, face } => {
                let contact = self.right_half[0].end();
                if rho >= contact.r {
                    d / (rho - (self.girth - rim))
                } else {
                    let fx = 0.5 * self.width - face;
                    (d - fx) / rho
                }
            }
            ShapeKind::LogCos { a } => (d / a).tan(),
        };
        (self.center - d, slope)
    }

    /// Geodesic curvature of the profile at the left-side point of height `rho`.
    pub fn curvature_at_height(&self, rho: f64) -> f64 {
        match self.kind {
            ShapeKind::Rounded { rim, face } => {
                if rho >= self.right_half[0].end().r {
                    1.0 / rim
                } else {
                    1.0 / face
                }
            }
            ShapeKind::LogCos { a } => {
                let (x, _) = self.left_side_at_height(rho);
                ((x - self.center) / a).cos() / a
            }
        }
    }

    /// Left half as pieces running from the axis up to the apex.
    pub fn left_half(&self) -> Vec<Piece> {
        self.right_half
            .iter()
            .rev()
            .map(|p| mirror_piece(p, self.center))
            .collect()
    }

    pub fn half_length(&self) -> f64 {
        self.right_half.iter().map(Piece::length).sum()
    }
}

/// Mirror image of a piece about `x = about`, traversed in reverse.
pub(crate) fn mirror_piece(p: &Piece, about: f64) -> Piece {
    match *p {
        Piece::Arc {
            center,
            radius,
            from,
            to,
        } => Piece::Arc {
            center: center.mirrored(about),
            radius,
            from: PI - to,
            to: PI - from,
        },
        Piece::LogCos { c, top, a, x0, x1 } => Piece::LogCos {
            c: 2.0 * about - c,
            top,
            a,
            x0: 2.0 * about - x1,
            x1: 2.0 * about - x0,
        },
    }
}

/// Builds a sampled pancake profile centered at `center_x` with node spacing
/// at most `spacing`.
pub fn make_pancake(
    spec: &PancakeSpec,
    center_x: f64,
    spacing: f64,
) -> Result<ProfileGraph, PancakeError> {
    spec.validate()?;
    let limit = spec.width_w / 16.0;
    if !(spacing > 0.0 && spacing < limit) {
        return Err(PancakeError::SpacingTooCoarse { spacing, limit });
    }
    let shape = spec.shape(center_x)?;
    let half = (shape.half_length() / spacing).ceil() as usize;
    let right = sample_chain(&shape.right_half, half);
    Ok(mirror_join(&right, center_x)?)
}

/// Completes a right half (starting at the apex `x = about`) by reflection.
pub(crate) fn mirror_join(
    right: &[Point],
    about: f64,
) -> Result<ProfileGraph, crate::error::GeometryError> {
    let mut nodes: Vec<Point> = right[1..].iter().rev().map(|p| p.mirrored(about)).collect();
    nodes.push(Point::new(about, right[0].r));
    nodes.extend_from_slice(&right[1..]);
    let last = nodes.len() - 1;
    nodes[0].r = 0.0;
    nodes[last].r = 0.0;
    ProfileGraph::new(nodes, [true, true])
}

/// Relaxes a profile under the flow for `burn_time` before it is used as
/// initial data.
///
/// Any topology change during the burn-in (pinch, split, extinction) or a
/// numerical failure is an error carrying the event.
pub fn anneal(
    profile: &ProfileGraph,
    burn_time: f64,
    config: &FlowConfig,
) -> Result<ProfileGraph, PancakeError> {
    if burn_time == 0.0 {
        return Ok(profile.clone());
    }
    if !(burn_time > 0.0) {
        return Err(PancakeError::BurnIn {
            kind: "negative burn time".into(),
            t: burn_time,
        });
    }
    let config = FlowConfig {
        max_time: burn_time,
        snapshot_stride: burn_time,
        ..config.clone()
    };
    let trace = evolve(profile, &config, |_| false).map_err(|e| PancakeError::BurnIn {
        kind: e.to_string(),
        t: 0.0,
    })?;
    if let Some(e) = trace.events.first() {
        return Err(PancakeError::BurnIn {
            kind: e.kind.as_str().to_string(),
            t: e.t,
        });
    }
    let end = trace.final_state;
    match (end.status, end.components.as_slice()) {
        (Status::Running, [one]) => Ok(one.clone()),
        (status, _) => Err(PancakeError::BurnIn {
            kind: format!("{status:?}").to_lowercase(),
            t: end.t,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{count_critical_points, default_plateau_tol, enclosed_area_above};

    #[test]
    fn girth_values() {
        let g = girth_asymptotic(-100.0, 3, 0.0).unwrap();
        assert!((g - (100.0 + 2.0 * 100f64.ln())).abs() < 1e-4);
        assert!((g - 109.2103).abs() < 1e-4);
        let g = girth_asymptotic(-1000.0, 4, 1.0).unwrap();
        assert!((g - 1021.7233).abs() < 1e-4);
        assert!(matches!(
            girth_asymptotic(-std::f64::consts::E, 3, 0.0),
            Err(PancakeError::AsymptoticRegime { .. })
        ));
    }

    #[test]
    fn width_is_two_pi() {
        assert_eq!(width_asymptotic(7), width_asymptotic(3));
        assert!((width_asymptotic(3) / PI - 2.0).abs() < 1e-15);
    }

    #[test]
    fn desk_spec_inverts_girth() {
        let d = PancakeSpec::desk();
        assert!((girth_law(d.s, 3, 0.0) - 20.0).abs() < 1e-9);
        assert!(d.s < -10.0);
    }

    fn desk(style: CapStyle) -> PancakeSpec {
        PancakeSpec {
            cap_style: style,
            ..PancakeSpec::desk()
        }
    }

    #[test]
    fn pancake_endpoints_and_maximum() {
        for style in [CapStyle::Semicircle, CapStyle::GrimReaper] {
            let p = make_pancake(&desk(style), 0.0, 0.05).unwrap();
            let nodes = p.nodes();
            assert!((nodes[0].x + PI).abs() < 1e-12);
            assert!((nodes[nodes.len() - 1].x - PI).abs() < 1e-12);
            assert_eq!(nodes[0].r, 0.0);
            let cp = count_critical_points(&p, default_plateau_tol(&p));
            assert_eq!((cp.maxima, cp.minima), (1, 0), "{style:?}");
            assert!((p.max_height() - 20.0).abs() < 1e-9);
            p.check_invariants().unwrap();
        }
    }

    #[test]
    fn pancake_is_symmetric() {
        for style in [CapStyle::Semicircle, CapStyle::GrimReaper] {
            let p = make_pancake(&desk(style), 2.5, 0.03).unwrap();
            let nodes = p.nodes();
            let n = nodes.len();
            for i in 0..n {
                let a = nodes[i];
                let b = nodes[n - 1 - i];
                assert!((a.x - 2.5 + (b.x - 2.5)).abs() <= 1e-12 * 2.5);
                assert_eq!(a.r, b.r);
            }
        }
    }

    #[test]
    fn pancake_area_against_trapezoid_oracle() {
        // The full meridian section spans r in [-g, g]: its area is 2 g w
        // minus the corners cut off by the caps.
        for style in [CapStyle::Semicircle, CapStyle::GrimReaper] {
            let spec = desk(style);
            let shape = spec.shape(0.0).unwrap();
            let k = 200_000;
            let h = spec.width_w / k as f64;
            let trapezoid: f64 = (0..k)
                .map(|i| {
                    let x0 = -PI + i as f64 * h;
                    let u0 = shape.height(x0).unwrap();
                    let u1 = shape.height((x0 + h).min(PI)).unwrap();
                    0.5 * h * (u0 + u1)
                })
                .sum();
            let cap_correction = 2.0 * (spec.girth_g * spec.width_w - trapezoid);
            let expected = 2.0 * spec.girth_g * spec.width_w - cap_correction;
            let p = make_pancake(&spec, 0.0, 0.02).unwrap();
            let area = 2.0 * enclosed_area_above(&p, 0.0).unwrap();
            assert!((area - expected).abs() / expected < 0.02, "{style:?}: {area} vs {expected}");
        }
    }

    #[test]
    fn degenerate_and_coarse_rejected() {
        let mut spec = PancakeSpec::desk();
        spec.girth_g = 5.0;
        assert!(matches!(
            make_pancake(&spec, 0.0, 0.05),
            Err(PancakeError::Degenerate { .. })
        ));
        assert!(matches!(
            make_pancake(&PancakeSpec::desk(), 0.0, 0.5),
            Err(PancakeError::SpacingTooCoarse { .. })
        ));
    }

    #[test]
    fn side_height_roundtrip() {
        for style in [CapStyle::Semicircle, CapStyle::GrimReaper] {
            let shape = desk(style).shape(0.0).unwrap();
            for rho in [0.5, 3.0, 10.0, 17.5, 19.9] {
                let (x, slope) = shape.left_side_at_height(rho);
                assert!((shape.height(x).unwrap() - rho).abs() < 1e-9, "{style:?} {rho}");
                let e = 1e-6;
                let fd = (shape.height(x + e).unwrap() - shape.height(x - e).unwrap()) / (2.0 * e);
                assert!((fd - slope).abs() < 1e-4 * slope.max(1.0), "{style:?} {rho}: {fd} {slope}");
            }
        }
    }

    fn burn_config(spacing: f64) -> FlowConfig {
        FlowConfig {
            n: 3,
            spacing,
            cfl: 0.8,
            pinch_eps: 4.0 * spacing,
            tip_eps: 4.0 * spacing,
            max_time: 1.0,
            snapshot_stride: 1.0,
        }
    }

    #[test]
    fn anneal_zero_is_identity() {
        let g = make_pancake(&PancakeSpec::desk(), 0.0, 0.1).unwrap();
        assert_eq!(anneal(&g, 0.0, &burn_config(0.1)).unwrap(), g);
    }

    #[test]
    fn anneal_sphere_follows_shrinking_law() {
        let count = 1572;
        let nodes: Vec<Point> = (0..=count)
            .map(|i| {
                let th = PI * (1.0 - i as f64 / count as f64);
                let r = if i == 0 || i == count { 0.0 } else { 5.0 * th.sin() };
                Point::new(5.0 * th.cos(), r)
            })
            .collect();
        let g = ProfileGraph::new(nodes, [true, true]).unwrap();
        let out = anneal(&g, 1.0, &burn_config(0.01)).unwrap();
        let expect = 19f64.sqrt();
        for p in out.nodes() {
            assert!((p.norm() / expect - 1.0).abs() < 0.01, "{p:?}");
        }
    }

    #[test]
    fn anneal_lowers_pancake_top() {
        let g = make_pancake(&PancakeSpec::desk(), 0.0, 0.1).unwrap();
        let out = anneal(&g, 0.5, &burn_config(0.1)).unwrap();
        assert!(out.max_height() < g.max_height());
        let cp = count_critical_points(&out, default_plateau_tol(&out));
        assert_eq!((cp.maxima, cp.minima), (1, 0));
    }

    #[test]
    fn anneal_reports_extinction() {
        let g = make_pancake(&PancakeSpec::desk(), 0.0, 0.1).unwrap();
        let err = anneal(&g, 500.0, &burn_config(0.1)).unwrap_err();
        assert!(matches!(err, PancakeError::BurnIn { .. }));
    }
}
