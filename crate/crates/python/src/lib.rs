//! Python bindings: automata, circuits and arenas as classes, plus the
//! solve / synthesize / verify flows on specification text.

use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use synth::aiger::{self, AigCircuit};
use synth::arena::{GameArena, Player};
use synth::gen::{self, ArenaFamily};
use synth::hoa::{self, ParityAutomaton};
use synth::pipeline::{self, Format, SolverChoice, Spec};
use synth::synthesis;
use synth::verify::{Verdict, Witness};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solver(name: &str) -> PyResult<SolverChoice> {
    name.parse().map_err(value_err)
}

fn load_spec(text: &str, format: Option<&str>) -> PyResult<Spec> {
    let format = match format {
        Some(f) => f.parse::<Format>().map_err(value_err)?,
        None => Spec::detect_format(Path::new(""), text).map_err(value_err)?,
    };
    Spec::parse(text, format).map_err(value_err)
}

/// Deterministic parity automaton read from extended HOA.
#[pyclass(name = "ParityAutomaton", module = "omega_synth")]
#[derive(Clone)]
struct PyAutomaton {
    inner: ParityAutomaton,
}

#[pymethods]
impl PyAutomaton {
    #[staticmethod]
    fn from_ehoa(text: &str) -> PyResult<Self> {
        Ok(PyAutomaton {
            inner: hoa::parse_ehoa(text).map_err(value_err)?,
        })
    }

    fn to_ehoa(&self) -> String {
        hoa::print_ehoa(&self.inner)
    }

    /// Complete min-even form of the automaton.
    fn normalize(&self) -> PyResult<Self> {
        Ok(PyAutomaton {
            inner: self.inner.normalize_acceptance().map_err(value_err)?,
        })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn aps(&self) -> Vec<String> {
        self.inner.aps.clone()
    }

    #[getter]
    fn controllable(&self) -> Vec<usize> {
        self.inner.controllable.clone()
    }

    /// Acceptance of the lasso word prefix · cycle^ω (valuations as integers).
    fn accepts_lasso(&self, prefix: Vec<u64>, cycle: Vec<u64>) -> PyResult<bool> {
        if cycle.is_empty() {
            return Err(PyValueError::new_err("cycle must be non-empty"));
        }
        Ok(self.inner.accepts_lasso(&prefix, &cycle))
    }

    fn __repr__(&self) -> String {
        format!(
            "ParityAutomaton(states={}, aps={:?})",
            self.inner.num_states(),
            self.inner.aps
        )
    }
}

/// And-inverter graph in ASCII AIGER form.
#[pyclass(name = "Circuit", module = "omega_synth")]
#[derive(Clone)]
struct PyCircuit {
    inner: AigCircuit,
}

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn from_aag(text: &str) -> PyResult<Self> {
        Ok(PyCircuit {
            inner: aiger::parse_aag(text).map_err(value_err)?,
        })
    }

    fn to_aag(&self) -> String {
        aiger::print_aag(&self.inner)
    }

    #[getter]
    fn num_inputs(&self) -> usize {
        self.inner.num_inputs()
    }

    #[getter]
    fn num_latches(&self) -> usize {
        self.inner.num_latches()
    }

    #[getter]
    fn num_outputs(&self) -> usize {
        self.inner.num_outputs()
    }

    #[getter]
    fn num_ands(&self) -> usize {
        synthesis::gate_count(&self.inner)
    }

    /// Runs from the all-zero latch state; one list of output values per step.
    fn simulate(&self, inputs: Vec<Vec<bool>>) -> PyResult<Vec<Vec<bool>>> {
        self.inner.run(&inputs).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(inputs={}, latches={}, outputs={}, ands={})",
            self.inner.num_inputs(),
            self.inner.num_latches(),
            self.inner.num_outputs(),
            self.inner.ands.len()
        )
    }
}

/// Two-player parity game arena (min-even; Eve wins on even).
#[pyclass(name = "Arena", module = "omega_synth")]
#[derive(Clone)]
struct PyArena {
    inner: GameArena,
}

#[pymethods]
impl PyArena {
    #[staticmethod]
    fn from_pgsolver(text: &str) -> PyResult<Self> {
        Ok(PyArena {
            inner: GameArena::from_pgsolver(text).map_err(value_err)?,
        })
    }

    /// Seeded generator: family is "random", "ladder" or "clique".
    #[staticmethod]
    #[pyo3(signature = (family, seed, n, d))]
    fn generate(family: &str, seed: u64, n: usize, d: u32) -> PyResult<Self> {
        let family: ArenaFamily = family.parse().map_err(value_err)?;
        Ok(PyArena {
            inner: gen::generate_arena(family, seed, n, d),
        })
    }

    fn to_pgsolver(&self) -> String {
        self.inner.to_pgsolver()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Winner of every vertex ("eve" or "adam") with the chosen solver.
    #[pyo3(signature = (solver = "zielonka"))]
    fn solve(&self, solver: &str) -> PyResult<Vec<&'static str>> {
        let winner = match solver {
            "brute-force" => synth::solver::brute_force_solve(&self.inner).map_err(value_err)?,
            name => {
                pipeline::solve_arena(&self.inner, self::solver(name)?)
                    .map_err(value_err)?
                    .winner
            }
        };
        Ok(winner
            .into_iter()
            .map(|p| if p == Player::Eve { "eve" } else { "adam" })
            .collect())
    }
}

/// Outcome of model checking a controller; failures carry a witness
/// (a safety witness has an empty cycle).
#[pyclass(name = "VerifyResult", module = "omega_synth", get_all)]
struct PyVerifyResult {
    passed: bool,
    prefix: Vec<u64>,
    cycle: Vec<u64>,
}

#[pymethods]
impl PyVerifyResult {
    fn __bool__(&self) -> bool {
        self.passed
    }

    fn __repr__(&self) -> String {
        if self.passed {
            "VerifyResult(PASS)".into()
        } else {
            format!("VerifyResult(FAIL, prefix={:?}, cycle={:?})", self.prefix, self.cycle)
        }
    }
}

/// Decides realizability of a specification given as eHOA or AIGER text.
#[pyfunction]
#[pyo3(signature = (spec, format = None, solver = "zielonka"))]
fn realizable(spec: &str, format: Option<&str>, solver: &str) -> PyResult<bool> {
    let spec = load_spec(spec, format)?;
    Ok(pipeline::realizability(&spec, self::solver(solver)?)
        .map_err(value_err)?
        .realizable)
}

/// Synthesizes an AIGER controller; None when the specification is unrealizable.
#[pyfunction]
#[pyo3(signature = (spec, format = None, solver = "zielonka"))]
fn synthesize(spec: &str, format: Option<&str>, solver: &str) -> PyResult<Option<PyCircuit>> {
    let spec = load_spec(spec, format)?;
    let out = pipeline::synthesize(&spec, self::solver(solver)?).map_err(value_err)?;
    Ok(out.controller.map(|inner| PyCircuit { inner }))
}

/// Model-checks `controller` against the specification text.
#[pyfunction]
#[pyo3(signature = (spec, controller, format = None))]
fn verify(spec: &str, controller: &PyCircuit, format: Option<&str>) -> PyResult<PyVerifyResult> {
    let spec = load_spec(spec, format)?;
    Ok(match pipeline::verify(&spec, &controller.inner).map_err(value_err)? {
        Verdict::Pass => PyVerifyResult {
            passed: true,
            prefix: vec![],
            cycle: vec![],
        },
        Verdict::Fail(Witness::Safety { inputs }) => PyVerifyResult {
            passed: false,
            prefix: inputs,
            cycle: vec![],
        },
        Verdict::Fail(Witness::Parity { prefix, cycle }) => PyVerifyResult {
            passed: false,
            prefix,
            cycle,
        },
    })
}

/// Quality points of a circuit of `size` gates against a reference size.
#[pyfunction]
fn quality_score(size: u64, reference: u64) -> f64 {
    synthesis::quality_score(size, reference)
}

#[pymodule]
fn omega_synth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAutomaton>()?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyArena>()?;
    m.add_class::<PyVerifyResult>()?;
    m.add_function(wrap_pyfunction!(realizable, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(quality_score, m)?)?;
    Ok(())
}
