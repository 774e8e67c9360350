"""Smoke test for the pancake_stack_py extension.

Build and install the extension first, e.g. `maturin develop -m
crates/python/Cargo.toml`, or copy the cdylib built with
`cargo build --release -p pancake-stack-py --features extension-module`
next to this script as `pancake_stack_py.so`.
"""

import json
import math
import sys

import pancake_stack_py as ps


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)
    print("ok:", msg)


def main():
    cfg = ps.FlowConfig(spacing=0.02, max_time=0.1, snapshot_stride=0.01)
    trace = ps.evolve(ps.sphere_profile(1.0, 0.02), cfg)
    t = trace.times[-1]
    (comp,) = trace.state(len(trace) - 1)
    radius = sum(math.hypot(x, r) for x, r in comp) / len(comp)
    check(abs(radius - ps.shrinking_sphere(1.0, 3, t)) < 1e-3, f"sphere radius {radius:.5f} at t = {t}")

    check(abs(ps.catenoid_half_width(3, 1.0) - 1.31103) < 1e-4, "catenoid half-width")
    try:
        ps.catenoid_half_width(2, 1.0)
        check(False, "n = 2 catenoid should be rejected")
    except ValueError as e:
        check("entire" in str(e), f"n = 2 catenoid rejected ({e})")

    torus = ps.torus_shrinker(2, 1000)
    check(torus["closure_residual"] < 1e-8, "torus shrinker closes")

    desk = ps.PancakeSpec.desk()
    curve, meta = ps.join_stack(desk, 0.1, m=1.5)
    check(abs(meta["m_achieved"] - 1.5) < 1e-6, "stack neck height")
    check(ps.critical_points(curve) == (2, 1), "stack has two maxima and one neck")
    check(ps.classify(desk, 0.05) == "TwoComponents", "thin neck pinches")
    check(ps.classify(desk, 18.0) == "OneComponent", "fat neck survives")

    dumbbell = ps.dumbbell_profile(3.0, 0.2, 5.0, 0.02)
    db = ps.evolve(dumbbell, ps.FlowConfig(spacing=0.02, max_time=0.02, snapshot_stride=0.0025))
    kinds = {e["kind"] for e in db.events()}
    check("pinch" in kinds, f"dumbbell pinches ({sorted(kinds)})")

    barriers = json.dumps([{"kind": "sphere", "params": {"r0": 0.7, "n": 3, "center": 0.5, "nodes": 401}}])
    report = ps.diagnose(trace, barriers, [0.25])
    check(len(report["times"]) == len(trace), "diagnostics series covers every state")

    cfg_json = ps.preset("stack-desk")
    check(len(ps.initial_curve(cfg_json)) > 100, "preset initial curve")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
