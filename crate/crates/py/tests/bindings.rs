use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "qbplab").unwrap();
        qbplab_py::qbplab_module(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("qbplab", m).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) {
    let c = std::ffi::CString::new(code).unwrap();
    if let Err(e) = py.run(&c, Some(globals), None) {
        e.print(py);
        panic!("python snippet failed: {code}");
    }
}

#[test]
fn programs_round_trip_and_evaluate() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
p = qbplab.build("fig1")
assert p.validate()[0]
q = qbplab.Program.parse(p.to_text())
assert q.size == p.size and q.n_vars == 2
assert abs(q.eval("11", steps=3)[1] - 1.0) < 1e-12
"#,
        );
    });
}

#[test]
fn errors_surface_as_python_exceptions() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
try:
    qbplab.build("perm", n=2).eval("1")
    raise SystemExit("no error")
except qbplab.QbpError as e:
    assert "variables" in str(e)
"#,
        );
    });
}

#[test]
fn analysis_helpers() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
assert qbplab.min_obdd("ip", 4) == 8
assert abs(qbplab.h2(0.5) - 1.0) < 1e-12
w = qbplab.gate_search([[1+0j, 0j], [0j, 1+0j]], 1e-9)
assert w is not None and w[1] < 1e-9
"#,
        );
    });
}
