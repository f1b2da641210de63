//! Python bindings: programs, validation, simulation, transforms and a few
//! analysis helpers. Inputs are bit strings such as `"0110"`.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use qbplab::analysis::{binary_entropy, is_k_stable, min_obdd_size};
use qbplab::families::{self, FunctionOracle, LinearFamily};
use qbplab::gateset::{approx_search, SearchOptions};
use qbplab::linalg::CMatrix;
use qbplab::semantics::{self, Method};
use qbplab::transforms::{self, Combiner};
use qbplab::{Assignment, BranchingProgram, Mode, C64};

create_exception!(qbplab, QbpError, PyException);

fn err(e: qbplab::Error) -> PyErr {
    QbpError::new_err(e.to_string())
}

fn input(bp: &BranchingProgram, bits: &str) -> PyResult<Assignment> {
    let a = Assignment::parse(bits).map_err(err)?;
    if a.len() != bp.n_vars() {
        return Err(QbpError::new_err(format!(
            "input has {} bits but the program has {} variables",
            a.len(),
            bp.n_vars()
        )));
    }
    Ok(a)
}

fn oracle(name: &str, n: usize) -> PyResult<FunctionOracle> {
    FunctionOracle::by_name(name, n).map_err(err)
}

/// A branching program in any mode.
#[pyclass(name = "Program", module = "qbplab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyProgram {
    inner: BranchingProgram,
}

fn wrap(r: qbplab::Result<BranchingProgram>) -> PyResult<PyProgram> {
    r.map(|inner| PyProgram { inner }).map_err(err)
}

#[pymethods]
impl PyProgram {
    /// Parse the text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        wrap(qbplab::model::parse_program(text))
    }

    fn to_text(&self) -> String {
        qbplab::model::serialize_program(&self.inner)
    }

    #[getter]
    fn n_vars(&self) -> usize {
        self.inner.n_vars()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode().name()
    }

    /// Longest start-to-sink path, or None for cyclic programs.
    #[getter]
    fn depth(&self) -> Option<usize> {
        self.inner.depth()
    }

    /// `(ok, max_residual, violations)` for the rules of the program's mode.
    #[pyo3(signature = (tol = qbplab::DEFAULT_TOL))]
    fn validate(&self, tol: f64) -> (bool, f64, Vec<String>) {
        let r = qbplab::validate::validate_profile(&self.inner, tol);
        let v = r
            .violations
            .iter()
            .map(|x| format!("{:?}: {}", x.rule, x.detail))
            .collect();
        (r.ok, r.max_residual, v)
    }

    /// `[p_0, p_1, p_?]` after `steps` steps (default: depth, or 100).
    #[pyo3(signature = (bits, steps = None))]
    fn eval(&self, bits: &str, steps: Option<usize>) -> PyResult<[f64; 3]> {
        let a = input(&self.inner, bits)?;
        let t = steps.or(self.inner.depth()).unwrap_or(100);
        match self.inner.mode() {
            Mode::Quantum => Ok(semantics::evolve(&self.inner, &a, t).probabilities()),
            Mode::QuantumGm(..) => Ok(semantics::evolve_gm(&self.inner, &a, t).map_err(err)?.probabilities()),
            _ => semantics::classical_eval(&self.inner, &a).map_err(err),
        }
    }

    /// Per-step halting masses `[[h_0, h_1, h_?], ...]` of a quantum program.
    fn trace(&self, bits: &str, steps: usize) -> PyResult<Vec<[f64; 3]>> {
        let a = input(&self.inner, bits)?;
        match self.inner.mode() {
            Mode::QuantumGm(..) => Ok(semantics::evolve_gm(&self.inner, &a, steps).map_err(err)?.halting),
            _ => Ok(semantics::evolve(&self.inner, &a, steps).halting),
        }
    }

    /// Unbounded-time probabilities `([p_0, p_1, p_?], uncertainty)`.
    #[pyo3(signature = (bits, method = "iterate", delta = 1e-10, t_max = 1_000_000, tail_tol = 1e-12))]
    fn absolute(&self, bits: &str, method: &str, delta: f64, t_max: usize, tail_tol: f64) -> PyResult<([f64; 3], f64)> {
        let a = input(&self.inner, bits)?;
        let m = match method {
            "iterate" => Method::Iterate { t_max, tail_tol },
            "damped" => Method::Damped { delta },
            other => return Err(QbpError::new_err(format!("unknown method {other:?}"))),
        };
        let r = semantics::absolute_probabilities(&self.inner, &a, m).map_err(err)?;
        Ok((r.p, r.uncertainty))
    }

    /// `(expected, tail_bound, steps)` of the running time.
    #[pyo3(signature = (bits, t_max = 1_000_000, tail_tol = 1e-12))]
    fn running_time(&self, bits: &str, t_max: usize, tail_tol: f64) -> PyResult<(f64, f64, usize)> {
        let a = input(&self.inner, bits)?;
        let r = semantics::running_times(&self.inner, &a, t_max, tail_tol);
        Ok((r.expected, r.tail_bound, r.steps))
    }

    /// Reinterpret the same graph under another mode: det, rand or quantum.
    fn with_mode(&self, mode: &str) -> PyResult<Self> {
        let m = match mode {
            "det" => Mode::Deterministic,
            "rand" => Mode::Randomized,
            "quantum" => Mode::Quantum,
            other => return Err(QbpError::new_err(format!("unknown mode {other:?}"))),
        };
        wrap(self.inner.with_mode(m))
    }

    fn levelize(&self, t: usize) -> PyResult<Self> {
        wrap(transforms::levelize(&self.inner, t))
    }

    fn realify(&self) -> PyResult<Self> {
        wrap(transforms::realify(&self.inner))
    }

    fn clock_wrap(&self, t: u32) -> PyResult<Self> {
        wrap(transforms::clock_wrap(&self.inner, t))
    }

    #[pyo3(signature = (copies, combiner = "all-accept"))]
    fn amplify(&self, copies: usize, combiner: &str) -> PyResult<Self> {
        let c: Combiner = combiner.parse().map_err(err)?;
        wrap(transforms::amplify(&self.inner, copies, c))
    }

    fn to_gm(&self) -> PyResult<Self> {
        wrap(transforms::randomized_to_gm(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Program(mode={}, n_vars={}, size={})",
            self.inner.mode().name(),
            self.inner.n_vars(),
            self.inner.size()
        )
    }
}

/// Build a named family: fig1, disj, ip, gm-disj, gm-ip, perm, ind, isa, tree.
#[pyfunction]
#[pyo3(signature = (family, n = 0, eps = 0.5, primes = None, function = "disj"))]
fn build(family: &str, n: usize, eps: f64, primes: Option<usize>, function: &str) -> PyResult<PyProgram> {
    wrap(match family {
        "fig1" => Ok(families::fig1_example()),
        "disj" => families::linear_obdd(LinearFamily::Disj, n),
        "ip" => families::linear_obdd(LinearFamily::Ip, n),
        "gm-disj" => families::gm_exact_obdd(LinearFamily::Disj, n),
        "gm-ip" => families::gm_exact_obdd(LinearFamily::Ip, n),
        "perm" => families::perm_qobdd(n, primes),
        "ind" => families::ind_zero_error_qobdd(n, eps),
        "isa" => families::isa_tree(n),
        "tree" => {
            let f = oracle(function, n)?;
            let order: Vec<usize> = (0..f.n_vars()).collect();
            families::reversible_tree(&f, &order)
        }
        other => return Err(QbpError::new_err(format!("unknown family {other:?}"))),
    })
}

/// Minimal OBDD size of a named function under the natural order.
#[pyfunction]
fn min_obdd(function: &str, n: usize) -> PyResult<usize> {
    let f = oracle(function, n)?;
    let order: Vec<usize> = (0..f.n_vars()).collect();
    min_obdd_size(&f, &order).map_err(err)
}

#[pyfunction]
fn k_stable(function: &str, n: usize, k: usize) -> PyResult<bool> {
    is_k_stable(&oracle(function, n)?, k).map_err(err)
}

/// Shannon entropy of a Bernoulli(p) variable, in bits.
#[pyfunction]
fn h2(p: f64) -> PyResult<f64> {
    binary_entropy(p).map_err(err)
}

/// Shortest gate word within `eps` of a square matrix given as rows of
/// complex numbers. Returns `(word, error)` or None.
#[pyfunction]
#[pyo3(signature = (target, eps, max_depth = 4, strict = false))]
fn gate_search(target: Vec<Vec<C64>>, eps: f64, max_depth: usize, strict: bool) -> PyResult<Option<(String, f64)>> {
    let d = target.len();
    if target.iter().any(|r| r.len() != d) {
        return Err(QbpError::new_err("target must be a square matrix"));
    }
    let m = CMatrix::from_fn(d, d, |i, j| target[i][j]);
    let opts = SearchOptions { max_depth, strict, frontier_limit: None };
    let r = approx_search(&m, eps, opts).map_err(err)?;
    Ok(r.is_found().then(|| (r.word().to_string(), r.error())))
}

/// Simulate a machine given as JSON; returns `[p_0, p_1, p_?]`.
#[pyfunction]
fn qtm_simulate(spec_json: &str, bits: &str, steps: usize) -> PyResult<[f64; 3]> {
    let m = qbplab::qtm::QtmSpec::from_json(spec_json)
        .and_then(|s| s.build())
        .map_err(err)?;
    let a = Assignment::parse(bits).map_err(err)?;
    Ok(qbplab::qtm::simulate_qtm(&m, &a, steps).map_err(err)?.probabilities())
}

/// JSON spec of a bundled machine: immediate-halt, interference,
/// leaky-loop, bidirectional, or, parity.
#[pyfunction]
#[pyo3(signature = (name, n = 1))]
fn qtm_machine(name: &str, n: usize) -> PyResult<String> {
    use qbplab::qtm;
    let spec = match name {
        "immediate-halt" => qtm::immediate_halt(),
        "interference" => qtm::interference(),
        "leaky-loop" => qtm::leaky_loop(),
        "bidirectional" => qtm::bidirectional(),
        "or" => qtm::or_machine(n),
        "parity" => qtm::parity_machine(n),
        other => return Err(QbpError::new_err(format!("unknown machine {other:?}"))),
    };
    Ok(spec.to_json())
}

/// Compile a machine given as JSON into a program.
#[pyfunction]
fn qtm_compile(spec_json: &str) -> PyResult<PyProgram> {
    let m = qbplab::qtm::QtmSpec::from_json(spec_json)
        .and_then(|s| s.build())
        .map_err(err)?;
    wrap(qbplab::qtm::compile_to_qbp(&m).map(|c| c.program))
}

#[pymodule]
#[pyo3(name = "qbplab")]
pub fn qbplab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QbpError", m.py().get_type::<QbpError>())?;
    m.add_class::<PyProgram>()?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(min_obdd, m)?)?;
    m.add_function(wrap_pyfunction!(k_stable, m)?)?;
    m.add_function(wrap_pyfunction!(h2, m)?)?;
    m.add_function(wrap_pyfunction!(gate_search, m)?)?;
    m.add_function(wrap_pyfunction!(qtm_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(qtm_machine, m)?)?;
    m.add_function(wrap_pyfunction!(qtm_compile, m)?)?;
    Ok(())
}
