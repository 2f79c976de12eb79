//! Python bindings: matrix pairs, classification, exponents, trace tables
//! and the slope solver.

use balpair::lyapunov;
use balpair::mat2::{parse_rational, Mat2Q, Q};
use balpair::optimizer;
use balpair::pairs::{self, MatrixPair};
use balpair::verify::{self, Suite, VerifyConfig};
use balpair::words::{self, SlopeFraction, Word};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyFloat, PyList};
use serde::Serialize;
use serde_json::Value;

fn err(e: balpair::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(xs) => {
            let list = PyList::empty(py);
            for x in xs {
                list.append(value_to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let dict = PyDict::new(py);
            for (k, x) in m {
                dict.set_item(k, value_to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// Floats convert through their binary expansion; everything else through
/// `str()`, so ints, `Fraction`s and strings like "3/4" are exact.
fn entry(obj: &Bound<'_, PyAny>) -> PyResult<Q> {
    if obj.is_instance_of::<PyFloat>() {
        let f: f64 = obj.extract()?;
        return Q::from_float(f).ok_or_else(|| PyValueError::new_err(format!("non-finite entry {f}")));
    }
    parse_rational(&obj.str()?.to_cow()?).map_err(err)
}

fn matrix(obj: &Bound<'_, PyAny>) -> PyResult<Mat2Q> {
    let rows: Vec<Vec<Bound<'_, PyAny>>> = obj.extract()?;
    if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
        return Err(PyValueError::new_err("expected a 2x2 nested list"));
    }
    Ok(Mat2Q::new(entry(&rows[0][0])?, entry(&rows[0][1])?, entry(&rows[1][0])?, entry(&rows[1][1])?))
}

fn word(s: &str) -> PyResult<Word> {
    s.parse().map_err(err)
}

fn slope(s: &str) -> PyResult<SlopeFraction> {
    s.parse().map_err(err)
}

/// An ordered pair `(A, B)` of real 2x2 matrices with positive determinants,
/// held exactly.
#[pyclass(name = "MatrixPair", frozen, module = "pybalpair", skip_from_py_object)]
#[derive(Clone)]
pub struct PyMatrixPair {
    inner: MatrixPair,
}

#[pymethods]
impl PyMatrixPair {
    #[new]
    fn new(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyMatrixPair { inner: MatrixPair::new(matrix(a)?, matrix(b)?).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyMatrixPair { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Entries of `A` and `B` as "p/q" strings.
    fn matrices<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn swapped(&self) -> Self {
        PyMatrixPair { inner: self.inner.swapped() }
    }

    /// Exact trace of the product along a binary word, as "p/q".
    fn trace(&self, w: &str) -> PyResult<String> {
        Ok(self.inner.product(&word(w)?).trace().to_string())
    }

    /// One of "co_parallel", "mixed", "parabolic_pair", "crossing", ...
    fn classify(&self) -> PyResult<String> {
        Ok(pairs::classify(&self.inner).map_err(err)?.name().to_string())
    }

    fn classification<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &pairs::classification_report(&self.inner).map_err(err)?)
    }

    /// Lyapunov exponent of the Sturmian measure with slope "p/q".
    fn chi(&self, slope_str: &str) -> PyResult<f64> {
        Ok(lyapunov::chi_rational(&self.inner, slope(slope_str)?).chi)
    }

    #[pyo3(signature = (alpha, max_den = 1000))]
    fn chi_irrational<'py>(&self, py: Python<'py>, alpha: &Bound<'py, PyAny>, max_den: u64) -> PyResult<Bound<'py, PyAny>> {
        let r = lyapunov::chi_irrational_exact(&self.inner, &entry(alpha)?, max_den).map_err(err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (depth = 8))]
    fn jsr_bounds<'py>(&self, py: Python<'py>, depth: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &lyapunov::jsr_bounds(&self.inner, depth).map_err(err)?)
    }

    fn trace_argmax<'py>(&self, py: Python<'py>, l: usize, n: usize) -> PyResult<Bound<'py, PyAny>> {
        let table = py.detach(|| lyapunov::trace_argmax(&self.inner, l, n)).map_err(err)?;
        to_py(py, &table)
    }

    #[pyo3(signature = (max_den = optimizer::DEFAULT_MAX_DEN))]
    fn maximize_slope<'py>(&self, py: Python<'py>, max_den: u64) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| optimizer::maximize_slope(&self.inner, max_den)).map_err(err)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("MatrixPair({})", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyfunction]
fn is_balanced(w: &str) -> PyResult<bool> {
    Ok(words::is_balanced(&word(w)?))
}

#[pyfunction]
fn cyclic_is_balanced(w: &str) -> PyResult<bool> {
    Ok(words::cyclic_is_balanced(&word(w)?))
}

#[pyfunction]
fn unbalance_witness(w: &str) -> PyResult<Option<String>> {
    Ok(words::unbalance_witness(&word(w)?).map(|u| u.to_string()))
}

#[pyfunction]
fn christoffel_cycle(slope_str: &str) -> PyResult<String> {
    Ok(words::christoffel_cycle(slope(slope_str)?).to_string())
}

#[pyfunction]
fn mechanical_word(slope_str: &str, n: usize) -> PyResult<String> {
    Ok(words::mechanical_word(slope(slope_str)?, n).to_string())
}

#[pyfunction]
fn trace_identity_check<'py>(
    py: Python<'py>,
    u: &Bound<'py, PyAny>,
    v: &Bound<'py, PyAny>,
    p: usize,
    q: usize,
    m: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &lyapunov::trace_identity_check(&matrix(u)?, &matrix(v)?, p, q, m).map_err(err)?)
}

/// Maximizing slopes of `(A, t·B)` over the grid.
#[pyfunction]
#[pyo3(signature = (pair, t_grid, max_den = 1000))]
fn sweep_family<'py>(py: Python<'py>, pair: &PyMatrixPair, t_grid: Vec<f64>, max_den: u64) -> PyResult<Bound<'py, PyAny>> {
    let (a, b) = pair.inner.as_tuple();
    let records = py.detach(|| optimizer::sweep_family(a, b, &t_grid, max_den)).map_err(err)?;
    to_py(py, &records)
}

/// A seeded random balanced pair, disguised by conjugation and scaling.
#[pyfunction]
fn random_balanced_pair(seed: u64) -> PyMatrixPair {
    let mut rng = balpair::family::rng(seed);
    PyMatrixPair { inner: balpair::family::random_balanced_pair(&mut rng).pair }
}

#[pyfunction]
#[pyo3(signature = (suite, seed = VerifyConfig::default().seed, pairs = 10))]
fn run_suite<'py>(py: Python<'py>, suite: &str, seed: u64, pairs: usize) -> PyResult<Bound<'py, PyAny>> {
    let suite: Suite = suite.parse().map_err(err)?;
    let cfg = VerifyConfig { seed, pairs, ..VerifyConfig::default() };
    let report = py.detach(|| verify::run_suite(suite, &cfg));
    to_py(py, &report)
}

#[pymodule]
fn pybalpair(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrixPair>()?;
    m.add_function(wrap_pyfunction!(is_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(cyclic_is_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(unbalance_witness, m)?)?;
    m.add_function(wrap_pyfunction!(christoffel_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(mechanical_word, m)?)?;
    m.add_function(wrap_pyfunction!(trace_identity_check, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_family, m)?)?;
    m.add_function(wrap_pyfunction!(random_balanced_pair, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
