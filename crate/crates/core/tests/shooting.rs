//! Desk-scale dichotomy and bisection.

use pancake_stack::join::{join, NeckJoinSpec};
use pancake_stack::pancake::PancakeSpec;
use pancake_stack::shoot::{anomalies, bisect, classify, desk_config, inscribed_radius, Label};

#[test]
fn thin_and_fat_necks_are_labelled_apart() {
    let desk = PancakeSpec::desk();
    let cfg = desk_config(0.1);
    let thin = classify(&desk, 0.05, &cfg).unwrap();
    assert_eq!(thin.label, Label::TwoComponents);
    assert!(thin.pinch_time.is_some());
    let fat = classify(&desk, 18.0, &cfg).unwrap();
    assert_eq!(fat.label, Label::OneComponent);
    assert!(fat.t_m.is_some());
}

#[test]
fn bisection_reaches_tolerance_within_sixteen_labels() {
    let desk = PancakeSpec::desk();
    let cfg = desk_config(0.1);
    let r = bisect(&desk, 0.05, 0.9 * desk.girth_g, &cfg).unwrap();
    assert!(r.bracket.1 - r.bracket.0 <= 1e-3 * desk.girth_g);
    assert!(r.classifications <= 16, "{}", r.classifications);
    assert!(anomalies(&r.samples).is_empty() && !r.suspect);
    let again = bisect(&desk, 0.05, 0.9 * desk.girth_g, &cfg).unwrap();
    assert_eq!(r, again);
}

#[test]
fn inscribed_radius_of_a_stack_lies_inside_its_height() {
    let desk = PancakeSpec::desk();
    let j = join(&NeckJoinSpec::with_m(desk.clone(), 2.0), 0.1).unwrap();
    let r0 = inscribed_radius(&j.curve);
    assert!(r0 > 0.0 && r0 <= j.curve.max_height() + 1e-9, "{r0}");
    assert!(r0 <= 0.5 * (j.curve.x_range().1 - j.curve.x_range().0));
}
