use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use regcover::covering::{verify_certificate as verify_cert, Certificate};
use regcover::ivmatch::{parse_instance, solve_iv_matching};
use regcover::meta::{regular_cover_check, MetaError, MetaOptions};
use regcover::multigraph::{parse_graph, serialize_graph, Multigraph};
use regcover::oracle::{enumerate_quotients_of_order, oracle_regular_cover};
use regcover::perm::{automorphism_group, DEFAULT_BUDGET};

create_exception!(regcover, RegcoverError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    RegcoverError::new_err(e.to_string())
}

/// A coloured multigraph with half-edges and loops.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: Multigraph,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: parse_graph(text).map_err(err)? })
    }

    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(err(format!("edge ({a}, {b}) leaves the {n} vertices")));
        }
        Ok(PyGraph { inner: regcover::generators::from_edges(n, &edges) })
    }

    fn to_text(&self) -> String {
        serialize_graph(&self.inner)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={})", self.inner.num_vertices(), self.inner.num_edges())
    }
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(xs) => {
            let l = PyList::empty(py);
            for x in xs {
                l.append(to_py(py, x)?)?;
            }
            l.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn verdict<'py>(py: Python<'py>, cert: Option<Certificate>, path: &str, stats: Option<serde_json::Value>) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("answer", cert.is_some())?;
    d.set_item("path", path)?;
    d.set_item("k", cert.as_ref().map(|c| c.k))?;
    d.set_item("certificate", cert.map(|c| c.to_json()))?;
    if let Some(s) = stats {
        d.set_item("stats", to_py(py, &s)?)?;
    }
    Ok(d)
}

/// Does `g` regularly cover `h`? Uses the structural algorithm for planar
/// `g` and the exhaustive search otherwise.
#[pyfunction]
#[pyo3(signature = (g, h, budget = None))]
fn regular_cover<'py>(py: Python<'py>, g: &PyGraph, h: &PyGraph, budget: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let opts = MetaOptions { budget, ..Default::default() };
    let res = py.detach(|| regular_cover_check(&g.inner, &h.inner, &opts));
    match res {
        Ok(out) => {
            let stats = serde_json::to_value(&out.stats).map_err(err)?;
            verdict(py, out.certificate, "meta", Some(stats))
        }
        Err(MetaError::NonPlanarInput) => {
            let c = py.detach(|| oracle_regular_cover(&g.inner, &h.inner, budget)).map_err(err)?;
            verdict(py, c, "oracle", None)
        }
        Err(e) => Err(err(e)),
    }
}

/// Exhaustive test through the subgroups of Aut(g).
#[pyfunction]
#[pyo3(signature = (g, h, budget = None))]
fn oracle_cover<'py>(py: Python<'py>, g: &PyGraph, h: &PyGraph, budget: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let c = py.detach(|| oracle_regular_cover(&g.inner, &h.inner, budget)).map_err(err)?;
    verdict(py, c, "oracle", None)
}

#[pyfunction]
fn verify_certificate(g: &PyGraph, h: &PyGraph, certificate: &str) -> PyResult<bool> {
    let c = Certificate::from_json(certificate).map_err(err)?;
    Ok(verify_cert(&g.inner, &h.inner, &c).is_ok())
}

#[pyfunction]
fn automorphism_order(g: &PyGraph) -> PyResult<usize> {
    Ok(automorphism_group(&g.inner, DEFAULT_BUDGET).map_err(err)?.order())
}

/// Pairwise non-isomorphic quotients of `g` by semiregular subgroups of order `k`.
#[pyfunction]
fn quotients(py: Python<'_>, g: &PyGraph, k: usize) -> PyResult<Vec<PyGraph>> {
    let qs = py.detach(|| enumerate_quotients_of_order(&g.inner, k, DEFAULT_BUDGET)).map_err(err)?;
    Ok(qs.into_iter().map(|inner| PyGraph { inner }).collect())
}

/// Solve an IV-Matching instance given in the text format. Returns the
/// chosen edges as (odd vertex, even vertex, kind) triples, or None.
#[pyfunction]
#[pyo3(signature = (text, budget = 10_000_000))]
fn ivmatch(text: &str, budget: u64) -> PyResult<Option<Vec<(String, String, String)>>> {
    let inst = parse_instance(text).map_err(err)?;
    let sol = solve_iv_matching(&inst, budget).map_err(err)?;
    let name = |(c, i): (usize, usize)| format!("{}[{i}]", inst.clusters[c].id);
    Ok(sol.map(|s| s.edges.into_iter().map(|(a, b, k)| (name(a), name(b), format!("{k:?}").to_lowercase())).collect()))
}

#[pymodule(name = "regcover")]
fn regcover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RegcoverError", m.py().get_type::<RegcoverError>())?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(regular_cover, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_cover, m)?)?;
    m.add_function(wrap_pyfunction!(verify_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(automorphism_order, m)?)?;
    m.add_function(wrap_pyfunction!(quotients, m)?)?;
    m.add_function(wrap_pyfunction!(ivmatch, m)?)?;
    Ok(())
}
