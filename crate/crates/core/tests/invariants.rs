//! Property tests for geometry and serialization invariants.

use pancake_stack::curve::{ParamCurve, Point, ProfileGraph};
use pancake_stack::io::{canonical_json, curve_csv, parse_curve_csv, sha256_hex};
use pancake_stack::measure::count_intersections;
use pancake_stack::resample::{expected_segments, resample};
use proptest::prelude::*;

fn bump(amp: f64, freq: f64, phase: f64) -> ProfileGraph {
    ProfileGraph::from_fn(-3.0, 3.0, 121, [false, false], move |x| 2.0 + amp * (freq * x + phase).sin()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn resampled_graph_keeps_ends_and_spacing(
        amp in 0.0f64..1.5,
        freq in 0.2f64..3.0,
        phase in 0.0f64..6.0,
        spacing in 0.03f64..0.3,
    ) {
        let g = bump(amp, freq, phase);
        let r = resample(&g, spacing).unwrap();
        r.check_invariants().unwrap();
        let (a, b) = (g.nodes(), r.nodes());
        prop_assert_eq!(a[0], b[0]);
        prop_assert_eq!(a[a.len() - 1], b[b.len() - 1]);
        let chords: Vec<f64> = b.windows(2).map(|w| w[0].dist(w[1])).collect();
        let max = chords.iter().cloned().fold(0.0, f64::max);
        prop_assert!(max <= spacing * (1.0 + 1e-9), "max chord {} > {}", max, spacing);
        let first = chords[0];
        prop_assert!(chords[..chords.len() - 1].iter().all(|c| (c - first).abs() < 1e-9 * spacing));
        prop_assert!(b.len() > expected_segments(r.length(), spacing));
    }

    #[test]
    fn resampling_is_idempotent(amp in 0.0f64..1.0, freq in 0.2f64..2.0, spacing in 0.05f64..0.3) {
        let once = resample(&bump(amp, freq, 0.3), spacing).unwrap();
        let twice = resample(&once, spacing).unwrap();
        prop_assert_eq!(once.len(), twice.len());
        for (p, q) in once.nodes().iter().zip(twice.nodes()) {
            prop_assert!(p.dist(*q) < 1e-9 * spacing);
        }
    }

    #[test]
    fn intersection_count_is_symmetric(
        amp in 0.1f64..1.5,
        freq in 0.3f64..3.0,
        level in 1.0f64..3.0,
        shift in -1.0f64..1.0,
    ) {
        let a = bump(amp, freq, 0.0);
        let b = ProfileGraph::from_fn(-3.0 + shift, 3.0 + shift, 97, [false, false], move |_| level).unwrap();
        let ab = count_intersections(&a, &b, 1e-9).unwrap();
        let ba = count_intersections(&b, &a, 1e-9).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn loop_crossings_are_even(dx in -1.5f64..1.5, dy in -1.5f64..1.5, radius in 0.3f64..2.0) {
        let circle = |c: Point, r: f64| {
            let pts = (0..90)
                .map(|i| {
                    let th = std::f64::consts::TAU * i as f64 / 90.0;
                    Point::new(c.x + r * th.cos(), c.r + r * th.sin())
                })
                .collect();
            ParamCurve::closed(pts).unwrap()
        };
        let a = circle(Point::new(0.0, 3.0), 1.0);
        let b = circle(Point::new(dx, 3.0 + dy), radius);
        let n = count_intersections(&a, &b, 1e-9).unwrap();
        prop_assert_eq!(n.crossings % 2, 0);
        prop_assert_eq!(n, count_intersections(&b, &a, 1e-9).unwrap());
    }

    #[test]
    fn curve_csv_round_trips_exactly(pts in prop::collection::vec((-1e6f64..1e6, 0.0f64..1e6), 1..40)) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, r)| Point::new(x, r)).collect();
        let back = parse_curve_csv(&curve_csv(&pts), "mem").unwrap();
        prop_assert_eq!(back, pts);
    }

    #[test]
    fn canonical_json_ignores_insertion_order(keys in prop::collection::btree_map("[a-z]{1,6}", -1e9f64..1e9, 0..12)) {
        let forward: serde_json::Map<String, serde_json::Value> =
            keys.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
        let backward: serde_json::Map<String, serde_json::Value> =
            keys.iter().rev().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
        let (a, b) = (canonical_json(&forward), canonical_json(&backward));
        prop_assert_eq!(sha256_hex(a.as_bytes()), sha256_hex(b.as_bytes()));
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        prop_assert_eq!(canonical_json(&parsed), a);
    }
}

#[test]
fn csv_errors_name_the_line() {
    let err = parse_curve_csv("x,r\n0,1\n0,oops\n", "f.csv").unwrap_err();
    assert_eq!(err.to_string(), "f.csv:3: bad r value in `0,oops`");
    assert!(parse_curve_csv("a,b\n", "f.csv").is_err());
    assert!(parse_curve_csv("x,r\n1,2,3\n", "f.csv").is_err());
}
