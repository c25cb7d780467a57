//! Python bindings: terms, types, the machine, reduction, typing and the
//! source encodings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fmc::encodings::{encode as encode_source, parse_source, Mode};
use fmc::machine::{memory_from_json, run as run_machine, trace_to_json, Memory, Outcome};
use fmc::reduction::{normalize_with, Strategy};
use fmc::syntax::{alpha_eq, parse_with, Features, ParseOptions};
use fmc::types::{check_with, find_type, parse_type, type_eq, CheckOptions, TypingContext};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn features(list: &str) -> PyResult<Features> {
    Features::from_list(list).map_err(value_error)
}

/// A machine term.
#[pyclass(frozen, skip_from_py_object, name = "Term", module = "fmc_py")]
#[derive(Clone)]
pub struct PyTerm {
    inner: fmc::syntax::Term,
}

#[pymethods]
impl PyTerm {
    #[new]
    #[pyo3(signature = (text, features = "", sugar = false))]
    fn new(text: &str, features: &str, sugar: bool) -> PyResult<Self> {
        parse(text, features, sugar)
    }

    fn size(&self) -> usize {
        self.inner.size()
    }

    /// Equality up to renaming of bound variables.
    fn alpha_eq(&self, other: &PyTerm) -> bool {
        alpha_eq(&self.inner, &other.inner)
    }

    fn __eq__(&self, other: &PyTerm) -> bool {
        self.alpha_eq(other)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", self.inner.to_string())
    }
}

/// A machine type.
#[pyclass(frozen, skip_from_py_object, name = "Type", module = "fmc_py")]
#[derive(Clone)]
pub struct PyType {
    inner: fmc::types::Type,
}

#[pymethods]
impl PyType {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_type(text)
            .map(|inner| PyType { inner })
            .map_err(value_error)
    }

    fn __eq__(&self, other: &PyType) -> bool {
        type_eq(&self.inner, &other.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Type({:?})", self.inner.to_string())
    }
}

/// Parse a term. `features` is a comma separated list such as "consts,thunks".
#[pyfunction]
#[pyo3(signature = (text, features = "", sugar = false))]
fn parse(text: &str, features: &str, sugar: bool) -> PyResult<PyTerm> {
    let mut opts = ParseOptions::new(self::features(features)?);
    if sugar {
        opts = opts.with_sugar();
    }
    parse_with(text, opts)
        .map(|inner| PyTerm { inner })
        .map_err(value_error)
}

/// Run a term on the machine. Returns the trace as JSON text and the outcome
/// as one of "halted", "stuck" or "fuel".
#[pyfunction]
#[pyo3(signature = (term, memory = None, fuel = fmc::machine::DEFAULT_FUEL, seed = 42, features = "consts,thunks"))]
fn run(
    term: &PyTerm,
    memory: Option<&str>,
    fuel: usize,
    seed: u64,
    features: &str,
) -> PyResult<(String, String)> {
    if fuel == 0 {
        return Err(PyValueError::new_err("fuel must be positive"));
    }
    let mem = match memory {
        Some(text) => {
            memory_from_json(text, self::features(features)?, seed).map_err(value_error)?
        }
        None => Memory::new(),
    };
    let trace = run_machine(mem, term.inner.clone(), fuel);
    let outcome = match trace.outcome {
        Outcome::Halted => "halted",
        Outcome::Stuck(_) => "stuck",
        Outcome::FuelExhausted => "fuel",
    };
    Ok((trace_to_json(&trace).to_string(), outcome.to_string()))
}

/// Normalize a term. Returns the normal form, or raises if `steps` runs out.
#[pyfunction]
#[pyo3(signature = (term, strategy = "lo", steps = 1000, eta = false))]
fn normalize(term: &PyTerm, strategy: &str, steps: usize, eta: bool) -> PyResult<(PyTerm, usize)> {
    let strategy: Strategy = strategy.parse().map_err(value_error)?;
    let r = normalize_with(&term.inner, strategy, steps, eta);
    if !r.is_normal() {
        return Err(PyRuntimeError::new_err(format!(
            "no normal form within {steps} steps"
        )));
    }
    Ok((PyTerm { inner: r.term }, r.steps.len()))
}

/// Check a term against a type, or search for one when `goal` is None.
/// Returns the type, or None when the term is not typeable.
#[pyfunction]
#[pyo3(signature = (term, goal = None))]
fn check(term: &PyTerm, goal: Option<&PyType>) -> Option<PyType> {
    let ctx = TypingContext::new();
    let opts = CheckOptions::default();
    match goal {
        Some(g) => check_with(&ctx, &term.inner, &g.inner, &opts)
            .ok()
            .map(|_| g.clone()),
        None => find_type(&ctx, &term.inner, &opts)
            .ok()
            .map(|(inner, _)| PyType { inner }),
    }
}

/// Translate a source term. Modes: cbn, cbv, cbpv, arrow, kappa.
#[pyfunction]
#[pyo3(signature = (source, mode = "cbn", features = "consts,thunks"))]
fn encode(source: &str, mode: &str, features: &str) -> PyResult<PyTerm> {
    let mode: Mode = mode.parse().map_err(value_error)?;
    let src = parse_source(source).map_err(value_error)?;
    encode_source(mode, &src, self::features(features)?)
        .map(|inner| PyTerm { inner })
        .map_err(value_error)
}

#[pymodule]
fn fmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTerm>()?;
    m.add_class::<PyType>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    Ok(())
}
