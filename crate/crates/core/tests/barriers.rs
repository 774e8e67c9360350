//! Barrier solutions against independent oracles.

use approx::assert_relative_eq;
use pancake_stack::barrier::{
    avoidance_check, catenoid_half_width, catenoid_profile, shrinker_residual, torus_shrinker_profile, BarrierCurve,
};
use pancake_stack::curve::Region;
use pancake_stack::flow::{evolve, FlowConfig};
use pancake_stack::presets::sphere_profile;
use pancake_stack::BarrierError;

/// `K(1/sqrt 2) / sqrt 2` from the arithmetic-geometric mean; the `n = 3`
/// half-width integral `∫_1^∞ ds / sqrt(s^4 - 1)` reduces to it.
fn agm_oracle() -> f64 {
    let (mut a, mut b) = (1.0f64, 0.5f64.sqrt());
    for _ in 0..8 {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    std::f64::consts::PI / (2.0 * a) / 2f64.sqrt()
}

#[test]
fn catenoid_half_width_matches_elliptic_oracle() {
    for c in [0.25, 1.0, 3.0] {
        let w = catenoid_half_width(3, c).unwrap();
        assert_relative_eq!(w, c * agm_oracle(), max_relative = 1e-12);
    }
    assert!((catenoid_half_width(3, 1.0).unwrap() - 1.31103).abs() < 1e-4);
}

#[test]
fn catenoid_width_shrinks_with_dimension() {
    let widths: Vec<f64> = (3..8).map(|n| catenoid_half_width(n, 1.0).unwrap()).collect();
    assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
}

#[test]
fn catenoid_profile_approaches_its_asymptote() {
    let w = catenoid_half_width(4, 1.0).unwrap();
    let p = catenoid_profile(4, 1.0, 200.0, 2001).unwrap();
    let tip = p.points.last().unwrap();
    assert!(tip.x < w && w - tip.x < 1e-4, "{} vs {w}", tip.x);
}

#[test]
fn dimension_two_catenoid_is_rejected() {
    assert_eq!(catenoid_half_width(2, 1.0), Err(BarrierError::EntireCatenoid));
}

#[test]
fn torus_shrinkers_close() {
    for (n, inner, outer) in [(2, 0.437, 3.315), (3, 0.922, 3.725)] {
        let t = torus_shrinker_profile(n, 2000).unwrap();
        assert!(t.closure_residual < 1e-8, "n = {n}: {}", t.closure_residual);
        assert!(t.shrinker_residual < 1e-6, "n = {n}: {}", t.shrinker_residual);
        assert!((t.r_inner - inner).abs() < 1e-3 && (t.r_outer - outer).abs() < 1e-3);
        assert!(shrinker_residual(&t.curve.points, n) < 1e-6);
    }
}

#[test]
fn nested_spheres_avoid_each_other() {
    let g = sphere_profile(0.5, 0.0, 0.01).unwrap();
    let cfg = FlowConfig {
        n: 3,
        spacing: 0.01,
        cfl: 0.8,
        pinch_eps: 0.04,
        tip_eps: 0.04,
        max_time: 0.04,
        snapshot_stride: 0.005,
    };
    let trace = evolve(&g, &cfg, |_| false).unwrap();
    let outer = BarrierCurve::sphere(1.0, 3, 0.0);
    let report = avoidance_check(&trace, &outer, &Region::everything()).unwrap();
    assert!(report.passes);
    assert!(report.rows.windows(2).all(|w| w[1].distance >= w[0].distance - report.slack));
    let crossing = BarrierCurve::sphere(0.5, 3, 0.3);
    assert!(matches!(
        avoidance_check(&trace, &crossing, &Region::everything()),
        Err(BarrierError::NotBarrier(_))
    ));
    let grim = BarrierCurve::grim_rotation(1.0, 2.0, 3, 3.0);
    assert!(avoidance_check(&trace, &grim, &Region::everything()).is_err());
}
