//! Named run configurations and the initial curves they describe.

use std::f64::consts::PI;

use crate::barrier::BarrierCurve;
use crate::curve::{Point, ProfileGraph, Region};
use crate::error::{GeometryError, JoinError};
use crate::flow::FlowConfig;
use crate::io::{DiagnosticsSettings, InitialSpec, RunConfig, ShootSettings, StudySettings};
use crate::join::{join, JoinedProfile, NeckJoinSpec, NeckParam};
use crate::pancake::PancakeSpec;
use crate::resample::resample;
use crate::shoot::{desk_config, Schedule};

pub const PRESETS: [&str; 4] = ["sphere", "cylinder", "dumbbell", "stack-desk"];

/// Initial curve built from a configuration, with the join metadata when
/// the curve is a glued stack.
#[derive(Clone, Debug)]
pub struct InitialCurve {
    pub graph: ProfileGraph,
    pub joined: Option<JoinedProfile>,
}

/// Semicircle of radius `radius` centered on the axis at `center`.
pub fn sphere_profile(radius: f64, center: f64, spacing: f64) -> Result<ProfileGraph, GeometryError> {
    let k = ((PI * radius / spacing).ceil() as usize).max(8);
    let nodes = (0..=k)
        .map(|i| {
            let th = PI * (1.0 - i as f64 / k as f64);
            let r = if i == 0 || i == k { 0.0 } else { radius * th.sin() };
            Point::new(center + radius * th.cos(), r)
        })
        .collect();
    ProfileGraph::new(nodes, [true, true])
}

pub fn cylinder_profile(radius: f64, x0: f64, x1: f64, spacing: f64) -> Result<ProfileGraph, GeometryError> {
    let k = (((x1 - x0) / spacing).ceil() as usize).max(8);
    ProfileGraph::from_fn(x0, x1, k + 1, [false, false], |_| radius)
}

/// Two spheres of radius `a` joined by the lower arc of a circle of radius
/// `b` whose lowest point has height `neck`; the arc is tangent to both
/// spheres.
pub fn dumbbell_profile(a: f64, neck: f64, b: f64, spacing: f64) -> Result<ProfileGraph, JoinError> {
    let cr = neck + b;
    let d = a + b;
    if !(neck > 0.0 && a > neck && b > 0.0) {
        return Err(JoinError::GeometryInconsistent(format!(
            "dumbbell needs 0 < neck < sphere radius and a positive arc radius, got {neck}, {a}, {b}"
        )));
    }
    let sx = (d * d - cr * cr).sqrt();
    let theta = cr.atan2(sx);
    let phi = (sx / d).asin();
    let fine = 0.25 * spacing;
    let mut pts = Vec::new();
    let ka = ((a * (PI - theta) / fine).ceil() as usize).max(4);
    for i in 0..ka {
        let th = PI - (PI - theta) * i as f64 / ka as f64;
        let r = if i == 0 { 0.0 } else { a * th.sin() };
        pts.push(Point::new(-sx + a * th.cos(), r));
    }
    let kb = ((2.0 * b * phi / fine).ceil() as usize).max(4);
    for i in 0..=kb {
        let f = -phi + 2.0 * phi * i as f64 / kb as f64;
        pts.push(Point::new(b * f.sin(), cr - b * f.cos()));
    }
    let right: Vec<Point> = pts[..ka].iter().rev().map(|p| Point::new(-p.x, p.r)).collect();
    pts.extend(right);
    let g = ProfileGraph::new(pts, [true, true])?;
    Ok(resample(&g, spacing)?)
}

/// Builds the initial curve of `config`, with `neck` overriding the
/// configured neck of a joined stack.
pub fn initial_curve(config: &RunConfig, neck: Option<NeckParam>) -> Result<InitialCurve, JoinError> {
    let h = config.flow.spacing;
    let graph = match &config.initial {
        InitialSpec::Joined { neck: default, gap_half } => {
            let spec = NeckJoinSpec {
                pancake: config.pancake.clone(),
                neck: neck.unwrap_or(*default),
                gap_half: *gap_half,
            };
            let j = join(&spec, h)?;
            return Ok(InitialCurve {
                graph: j.curve.clone(),
                joined: Some(j),
            });
        }
        InitialSpec::Sphere { radius, center } => sphere_profile(*radius, *center, h)?,
        InitialSpec::Cylinder { radius, x0, x1 } => cylinder_profile(*radius, *x0, *x1, h)?,
        InitialSpec::Dumbbell {
            sphere_radius,
            neck,
            arc_radius,
        } => dumbbell_profile(*sphere_radius, *neck, *arc_radius, h)?,
    };
    Ok(InitialCurve { graph, joined: None })
}

fn flow(spacing: f64, max_time: f64, stride: f64) -> FlowConfig {
    FlowConfig {
        n: 3,
        spacing,
        cfl: 0.8,
        pinch_eps: 4.0 * spacing,
        tip_eps: 4.0 * spacing,
        max_time,
        snapshot_stride: stride,
    }
}

/// The desk stack configuration; the other presets reuse its pancake,
/// schedule and shooting sections.
fn desk() -> RunConfig {
    let shoot = desk_config(0.1);
    RunConfig {
        flow: shoot.flow.clone(),
        initial: InitialSpec::Joined {
            neck: NeckParam::M(2.0),
            gap_half: shoot.gap_half,
        },
        pancake: PancakeSpec::desk(),
        schedule: Schedule::desk(),
        shoot: ShootSettings {
            m_threshold: shoot.m_threshold,
            tol_m: shoot.tol_m,
            delta: shoot.delta,
            gap_half: shoot.gap_half,
            band: shoot.band,
            band_unit: shoot.band_unit,
            tracking: shoot.tracking,
        },
        study: StudySettings {
            window: Region {
                x: (-8.0, 8.0),
                r: (2.0, 12.0),
            },
            times: vec![-4.0, -3.0, -2.0, -1.0, 0.0],
        },
        diagnostics: DiagnosticsSettings {
            barriers: vec![BarrierCurve::catenoid(3, 0.5, 15.0, 0.0)],
            c_fractions: vec![0.25, 0.5],
        },
        threads: None,
        output_dir: "runs/stack-desk".into(),
    }
}

/// Named configuration, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<RunConfig> {
    let base = desk();
    let cfg = match name {
        "stack-desk" => base,
        "sphere" => RunConfig {
            flow: flow(0.01, 0.2, 0.005),
            initial: InitialSpec::Sphere {
                radius: 1.0,
                center: 0.0,
            },
            diagnostics: DiagnosticsSettings {
                barriers: vec![
                    BarrierCurve::sphere(0.7, 3, 0.5),
                    BarrierCurve::cylinder(0.5, 3, -2.0, 2.0),
                    BarrierCurve::catenoid(3, 0.3, 2.0, 0.0),
                ],
                c_fractions: vec![0.25, 0.5],
            },
            output_dir: "runs/sphere".into(),
            ..base
        },
        "cylinder" => RunConfig {
            flow: flow(0.05, 1.0, 0.05),
            initial: InitialSpec::Cylinder {
                radius: 10.0,
                x0: -1.0,
                x1: 1.0,
            },
            diagnostics: DiagnosticsSettings {
                barriers: vec![BarrierCurve::sphere(10.2, 3, 0.0), BarrierCurve::cylinder(9.5, 3, -1.0, 1.0)],
                c_fractions: vec![],
            },
            output_dir: "runs/cylinder".into(),
            ..base
        },
        "dumbbell" => RunConfig {
            flow: flow(0.01, 0.05, 0.0025),
            initial: InitialSpec::Dumbbell {
                sphere_radius: 3.0,
                neck: 0.2,
                arc_radius: 5.0,
            },
            diagnostics: DiagnosticsSettings {
                barriers: vec![BarrierCurve::sphere(3.2, 3, 6.08), BarrierCurve::catenoid(3, 0.3, 2.5, 0.0)],
                c_fractions: vec![0.25, 0.5],
            },
            output_dir: "runs/dumbbell".into(),
            ..base
        },
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            let init = initial_curve(&cfg, None).unwrap();
            init.graph.check_invariants().unwrap();
        }
        assert!(preset("torus").is_none());
    }

    #[test]
    fn dumbbell_is_tangent_and_symmetric() {
        let g = dumbbell_profile(3.0, 0.2, 5.0, 0.01).unwrap();
        let (x0, x1) = g.x_range();
        let sx = (64.0f64 - 5.2 * 5.2).sqrt();
        assert!((x0 + sx + 3.0).abs() < 1e-9 && (x1 - sx - 3.0).abs() < 1e-9);
        assert!((g.height_at(0.0).unwrap() - 0.2).abs() < 1e-4);
        assert!((g.max_height() - 3.0).abs() < 1e-4);
    }
}
