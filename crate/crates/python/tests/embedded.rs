//! Drives the module through an embedded interpreter.

use pancake_stack_py::pancake_stack_py as module;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &str) -> PyResult<()> {
    pyo3::append_to_inittab!(module);
    Python::initialize();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        let code = std::ffi::CString::new(code).unwrap();
        py.run(&code, Some(&globals), None)
    })
}

#[test]
fn module_round_trip() {
    run(r#"
import math
import pancake_stack_py as ps

cfg = ps.FlowConfig(spacing=0.05, max_time=0.05, snapshot_stride=0.01)
trace = ps.evolve(ps.sphere_profile(1.0, 0.05), cfg)
assert len(trace) == len(trace.times) > 2
(comp,) = trace.state(len(trace) - 1)
mean = sum(math.hypot(x, r) for x, r in comp) / len(comp)
assert abs(mean - ps.shrinking_sphere(1.0, 3, trace.times[-1])) < 5e-3

assert abs(ps.catenoid_half_width(3, 1.0) - 1.31103) < 1e-4
try:
    ps.catenoid_half_width(2, 1.0)
except ValueError:
    pass
else:
    raise AssertionError("n = 2 accepted")

desk = ps.PancakeSpec.desk()
assert desk.girth == 20.0 and abs(desk.width - 2 * math.pi) < 1e-12
"#)
    .unwrap_or_else(|e| Python::attach(|py| panic!("{}", e.value(py))));
}
