use pancake_stack::flow::{evolve, FlowConfig};
use pancake_stack::io::{canonical_json, read_trace, write_file, write_trace, RunConfig};
use pancake_stack::presets::{preset, sphere_profile, PRESETS};

#[test]
fn presets_survive_a_json_round_trip() {
    for name in PRESETS {
        let cfg = preset(name).unwrap();
        let text = canonical_json(&cfg);
        let back = RunConfig::from_json(&text, name).unwrap();
        assert_eq!(canonical_json(&back), text, "{name}");
    }
}

#[test]
fn invalid_configs_are_rejected_with_a_reason() {
    let base = serde_json::to_value(preset("stack-desk").unwrap()).unwrap();
    let cases = [
        ("/schedule/s", serde_json::json!([-3.0, 1.0]), "must be negative"),
        ("/study/window/r", serde_json::json!([0.0, 4.0]), "off the axis"),
        ("/diagnostics/c_fractions", serde_json::json!([1.5]), "c_fractions"),
        ("/initial/gap_half", serde_json::json!(0.0), "gap_half"),
    ];
    for (ptr, value, needle) in cases {
        let mut v = base.clone();
        *v.pointer_mut(ptr).unwrap() = value;
        let err = RunConfig::from_json(&v.to_string(), "case").unwrap_err().to_string();
        assert!(err.contains(needle), "{ptr}: {err}");
    }
    assert!(RunConfig::from_json("{", "broken").unwrap_err().to_string().starts_with("broken: invalid JSON"));
}

#[test]
fn trace_directory_round_trips() {
    let g = sphere_profile(1.0, 0.0, 0.05).unwrap();
    let cfg = FlowConfig {
        n: 3,
        spacing: 0.05,
        cfl: 0.8,
        pinch_eps: 0.2,
        tip_eps: 0.2,
        max_time: 0.25,
        snapshot_stride: 0.02,
    };
    let trace = evolve(&g, &cfg, |_| false).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_trace(dir.path(), &trace).unwrap();
    let doc = serde_json::json!({ "trace": manifest });
    write_file(&dir.path().join("manifest.json"), &canonical_json(&doc)).unwrap();
    let back = read_trace(dir.path()).unwrap();
    assert_eq!(back.snapshots.len(), trace.snapshots.len());
    for (a, b) in back.snapshots.iter().zip(&trace.snapshots) {
        assert_eq!(a.t, b.t);
        assert_eq!(a.components, b.components);
    }
    assert_eq!(back.extinction_time, trace.extinction_time);
}
