//! Exact-solution checks of the flow and the surgery path.

use pancake_stack::barrier::{shrinking_cylinder, shrinking_sphere};
use pancake_stack::flow::{evolve, EventKind, FlowConfig, Status};
use pancake_stack::presets::{cylinder_profile, dumbbell_profile, sphere_profile};
use pancake_stack::shoot::state_at;

fn config(spacing: f64, max_time: f64, stride: f64) -> FlowConfig {
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

#[test]
fn large_sphere_follows_radius_law() {
    let g = sphere_profile(5.0, 0.0, 0.05).unwrap();
    let trace = evolve(&g, &config(0.05, 1.0, 0.25), |_| false).unwrap();
    let end = &trace.final_state;
    assert!((end.t - 1.0).abs() < 1e-12);
    let exact = shrinking_sphere(5.0, 3, 1.0).unwrap();
    assert!((exact - 19f64.sqrt()).abs() < 1e-14);
    let top = end.max_height();
    let (x0, x1) = end.components[0].x_range();
    assert!((top - exact).abs() < 2e-3 * exact, "{top}");
    assert!((0.5 * (x1 - x0) - exact).abs() < 2e-3 * exact);
}

#[test]
fn cylinder_interior_follows_radius_law() {
    let g = cylinder_profile(10.0, -1.0, 1.0, 0.05).unwrap();
    let trace = evolve(&g, &config(0.05, 1.0, 0.1), |_| false).unwrap();
    for s in trace.states() {
        let u = s.components[0].height_at(0.0).unwrap();
        let exact = shrinking_cylinder(10.0, 3, s.t).unwrap();
        assert!((u - exact).abs() < 2e-3 * exact, "t = {}: {u} vs {exact}", s.t);
    }
    let u1 = trace.final_state.components[0].height_at(0.0).unwrap();
    assert!((u1 - 96f64.sqrt()).abs() < 2e-3 * 96f64.sqrt());
}

#[test]
fn sphere_error_shrinks_under_refinement() {
    let err = |h: f64| {
        let g = sphere_profile(1.0, 0.0, h).unwrap();
        let trace = evolve(&g, &config(h, 0.12, 0.01), |_| false).unwrap();
        trace
            .states()
            .iter()
            .map(|s| {
                let nodes = s.components[0].nodes();
                let mean = nodes.iter().map(|p| p.norm()).sum::<f64>() / nodes.len() as f64;
                let exact = shrinking_sphere(1.0, 3, s.t).unwrap();
                (mean - exact).abs() / exact
            })
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(0.02), err(0.01));
    assert!(fine < 5e-3);
    assert!(coarse / fine >= 3.5, "{coarse} / {fine}");
}

#[test]
fn dumbbell_pinches_before_its_lobes_shrink() {
    let g = dumbbell_profile(3.0, 0.2, 5.0, 0.01).unwrap();
    let trace = evolve(&g, &config(0.01, 0.05, 0.0025), |_| false).unwrap();
    let pinch = trace.first_event(EventKind::Pinch).expect("neck pinches");
    assert!(pinch.t <= 0.0105, "{}", pinch.t);
    assert!(pinch.x.abs() < 0.05);
    assert!(trace.first_event(EventKind::Split).is_some());
    let after = trace.states().into_iter().find(|s| s.t > pinch.t).unwrap();
    assert_eq!(after.components.len(), 2);
    assert!(after.max_height() > 2.9);
}

#[test]
fn sphere_goes_extinct_at_the_predicted_time() {
    let g = sphere_profile(1.0, 0.0, 0.01).unwrap();
    let trace = evolve(&g, &config(0.01, 0.5, 0.01), |_| false).unwrap();
    let w = trace.extinction_time.unwrap();
    assert!((w - 1.0 / 6.0).abs() < 2e-3, "{w}");
    assert_eq!(trace.final_state.status, Status::Extinct);
}

#[test]
fn time_slice_of_a_stored_snapshot_is_the_snapshot() {
    let g = sphere_profile(1.0, 0.0, 0.02).unwrap();
    let trace = evolve(&g, &config(0.02, 0.05, 0.01), |_| false).unwrap();
    for s in &trace.snapshots {
        let again = state_at(&trace, s.t).unwrap();
        assert_eq!(again.components, s.components);
    }
}

#[test]
fn rerunning_is_bitwise_identical() {
    let g = dumbbell_profile(3.0, 0.3, 5.0, 0.02).unwrap();
    let c = config(0.02, 0.03, 0.005);
    let a = evolve(&g, &c, |_| false).unwrap();
    let b = evolve(&g, &c, |_| false).unwrap();
    assert_eq!(a, b);
}
