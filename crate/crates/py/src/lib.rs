//! Python bindings for `mdsfit`.
//!
//! Structured results (codes, reduction traces, reports) come back as
//! plain dicts with the same layout as the CLI's `--json` output.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mdsfit::codegen::{self, SearchOptions, Strategy, DEFAULT_BUDGET, DEFAULT_SEED};
use mdsfit::io;
use mdsfit::reduction::{self, TieBreak};
use mdsfit::structures;
use mdsfit::verify::{self, LemmaScope, Mode, Scope};

create_exception!(mdsfit_py, MdsfitError, PyException);

fn err(e: mdsfit::Error) -> PyErr {
    MdsfitError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| MdsfitError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse<T: std::str::FromStr<Err = mdsfit::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

#[pyclass(name = "SupportMatrix", module = "mdsfit_py", frozen)]
struct PySupportMatrix {
    inner: structures::SupportMatrix,
}

#[pymethods]
impl PySupportMatrix {
    /// Rows as `"0"`/`"1"` strings of equal length.
    #[new]
    fn new(rows: Vec<String>) -> PyResult<Self> {
        Self::parse(&rows.join("\n"))
    }

    /// Text or JSON, as accepted by the CLI.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PySupportMatrix {
            inner: io::parse_matrix(text).map_err(err)?,
        })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn rows(&self) -> Vec<String> {
        io::matrix_to_json(&self.inner).rows
    }

    /// `(holds, witness)` with a 1-based violating row set.
    fn mds_condition(&self) -> (bool, Option<Vec<usize>>) {
        let check = structures::mds_condition(&self.inner);
        (check.holds, check.witness.map(|w| w.iter().map(|i| i + 1).collect()))
    }

    fn root_family(&self) -> PyResult<PyRootFamily> {
        Ok(PyRootFamily {
            inner: structures::to_root_family(&self.inner).map_err(err)?,
        })
    }

    /// Finds evaluation points over GF(q) and returns the generator
    /// matrix with its verification. `q` defaults to the smallest prime
    /// power at least `n + m - 1`.
    #[pyo3(signature = (q=None, strategy="auto", seed=DEFAULT_SEED, budget=DEFAULT_BUDGET, allow_small_field=false))]
    fn build_code<'py>(
        &self,
        py: Python<'py>,
        q: Option<u64>,
        strategy: &str,
        seed: u64,
        budget: u64,
        allow_small_field: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let q = q.unwrap_or_else(|| codegen::smallest_prime_power((self.inner.n() + self.inner.m() - 1) as u64));
        let field = mdsfit::make_field(q).map_err(err)?;
        let opts = SearchOptions {
            strategy: parse::<Strategy>(strategy)?,
            seed,
            budget,
            allow_small_field,
        };
        let inner = &self.inner;
        let code = py.detach(|| codegen::build_code(inner, &field, &opts)).map_err(err)?;
        to_py(py, &io::code_to_json(&code))
    }

    fn __repr__(&self) -> String {
        format!("SupportMatrix({:?})", self.rows())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(name = "RootFamily", module = "mdsfit_py", frozen)]
struct PyRootFamily {
    inner: structures::RootFamily,
}

#[pymethods]
impl PyRootFamily {
    /// `sets` holds 1-based variable indices, one list per polynomial.
    #[new]
    #[pyo3(signature = (n, sets, allow_loose_n=false))]
    fn new(n: usize, sets: Vec<Vec<u32>>, allow_loose_n: bool) -> PyResult<Self> {
        let inner = structures::RootFamily::new(n, &sets).map_err(err)?;
        inner.validate(allow_loose_n).map_err(err)?;
        Ok(PyRootFamily { inner })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn sets(&self) -> Vec<Vec<u32>> {
        self.inner.sets()
    }

    #[getter]
    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    /// The determinant polynomial, in the CLI's text form.
    fn wdet(&self, py: Python<'_>) -> PyResult<String> {
        let inner = &self.inner;
        Ok(py.detach(|| inner.wdet()).map_err(err)?.to_string())
    }

    fn w_is_zero(&self, py: Python<'_>) -> PyResult<bool> {
        let inner = &self.inner;
        Ok(py.detach(|| inner.wdet()).map_err(err)?.is_identically_zero())
    }

    fn has_rp(&self) -> PyResult<Option<(Vec<usize>, Vec<u32>)>> {
        Ok(structures::has_rp(&self.inner).map_err(err)?.map(witness))
    }

    /// `(polys, common_roots)` or `None`; polynomial indices are 1-based.
    fn has_grp(&self) -> Option<(Vec<usize>, Vec<u32>)> {
        structures::has_grp(&self.inner).map(witness)
    }

    /// Runs the reduction with tie-break `"lex"` or `"reverse"`.
    #[pyo3(signature = (policy="lex"))]
    fn reduce<'py>(&self, py: Python<'py>, policy: &str) -> PyResult<Bound<'py, PyAny>> {
        let policy = match policy {
            "lex" => TieBreak::Lex,
            "reverse" => TieBreak::Reverse,
            other => return Err(MdsfitError::new_err(format!("unknown policy {other:?}"))),
        };
        let trace = reduction::reduce(&self.inner, policy).map_err(err)?;
        to_py(py, &io::trace_json(&trace))
    }

    /// Every distinct reduction outcome.
    fn reduce_all<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let traces = reduction::reduce_all(&self.inner).map_err(err)?;
        let docs: Vec<_> = traces.iter().map(io::trace_json).collect();
        to_py(py, &docs)
    }

    /// Classification of the family against the GRP/`W ≡ 0` equivalence.
    #[pyo3(signature = (exact=true, seed=DEFAULT_SEED))]
    fn classify(&self, py: Python<'_>, exact: bool, seed: u64) -> PyResult<String> {
        let inner = &self.inner;
        let check = py.detach(|| verify::check_conjecture(inner, exact, seed)).map_err(err)?;
        Ok(serde_json::to_value(check.classification)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default())
    }

    fn canonical(&self) -> Self {
        PyRootFamily {
            inner: verify::canonical_form(&self.inner),
        }
    }

    fn support_matrix(&self) -> PyResult<PySupportMatrix> {
        Ok(PySupportMatrix {
            inner: structures::to_support_matrix(&self.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("RootFamily(n={}, sets={:?})", self.inner.n(), self.inner.sets())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn witness(w: structures::PropertyWitness) -> (Vec<usize>, Vec<u32>) {
    (w.polys.iter().map(|i| i + 1).collect(), w.common_roots)
}

/// Conjecture suite over one `(m, n)` scope; returns the report dict.
#[pyfunction]
#[pyo3(signature = (m, n, profile=None, mode="exhaustive", samples=1000, seed=DEFAULT_SEED, fast=false, canonical=true, budget=None))]
#[allow(clippy::too_many_arguments)]
fn run_suite<'py>(
    py: Python<'py>,
    m: usize,
    n: usize,
    profile: Option<Vec<usize>>,
    mode: &str,
    samples: u64,
    seed: u64,
    fast: bool,
    canonical: bool,
    budget: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let scope = Scope {
        m,
        n,
        profile,
        mode: parse::<Mode>(mode)?,
        samples,
        seed,
        fast,
        canonical,
        budget,
    };
    let report = py.detach(|| verify::run_suite(&scope)).map_err(err)?;
    let doc = to_py(py, &report)?;
    doc.cast::<PyDict>()?.set_item("passed", report.passed())?;
    Ok(doc)
}

/// MDS condition vs. absence of the rectangular property.
#[pyfunction]
#[pyo3(signature = (m, n, limit=100_000, seed=DEFAULT_SEED))]
fn check_fact1<'py>(py: Python<'py>, m: usize, n: usize, limit: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| verify::check_fact1(m, n, limit, seed)).map_err(err)?;
    to_py(py, &report)
}

/// Per-family checks of the reduction lemmas.
#[pyfunction]
#[pyo3(signature = (m, n, profile=None, exhaustive=true, samples=1000, seed=DEFAULT_SEED, lemma1=false, lemma1_fast=false))]
#[allow(clippy::too_many_arguments)]
fn check_lemmas<'py>(
    py: Python<'py>,
    m: usize,
    n: usize,
    profile: Option<Vec<usize>>,
    exhaustive: bool,
    samples: u64,
    seed: u64,
    lemma1: bool,
    lemma1_fast: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let scope = LemmaScope {
        m,
        n,
        profile,
        exhaustive,
        samples,
        seed,
        lemma1,
        lemma1_fast,
    };
    let report = py.detach(|| verify::check_reduction_lemmas(&scope)).map_err(err)?;
    let doc = to_py(py, &report)?;
    doc.cast::<PyDict>()?.set_item("passed", report.passed())?;
    Ok(doc)
}

#[pymodule]
fn mdsfit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MdsfitError", m.py().get_type::<MdsfitError>())?;
    m.add_class::<PySupportMatrix>()?;
    m.add_class::<PyRootFamily>()?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(check_fact1, m)?)?;
    m.add_function(wrap_pyfunction!(check_lemmas, m)?)?;
    Ok(())
}
