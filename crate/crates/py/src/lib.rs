use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use meandim::blocksys::BlockSystem;
use meandim::cover::{self, GroundSet};
use meandim::dynsys::{self, FinitePermSystem, SymbolicSystemDescriptor};
use meandim::rational::parse_q;
use meandim::verify::{self, VerifyConfig};
use meandim::{cube, simplicial, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::Input(_) | Error::Precondition(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_json(text: &str) -> PyResult<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("malformed JSON: {e}")))
}

/// A finite cover of a finite set.
#[pyclass(name = "Cover", frozen)]
struct PyCover {
    inner: cover::Cover,
}

#[pymethods]
impl PyCover {
    /// Cover of the points `0..n` by the given index lists.
    #[new]
    fn new(n: usize, sets: Vec<Vec<usize>>) -> PyResult<Self> {
        let inner = cover::Cover::from_sets(Arc::new(GroundSet::range(n)), sets).map_err(err)?;
        Ok(PyCover { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = cover::Cover::from_json(&parse_json(text)?).map_err(err)?;
        Ok(PyCover { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn order(&self) -> usize {
        self.inner.order()
    }

    fn order_at(&self, point: usize) -> PyResult<usize> {
        self.inner.order_at(point).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn join(&self, other: &PyCover) -> PyResult<PyCover> {
        Ok(PyCover { inner: cover::join(&self.inner, &other.inner).map_err(err)? })
    }

    fn refines(&self, other: &PyCover) -> PyResult<bool> {
        cover::refines(&self.inner, &other.inner).map_err(err)
    }

    fn nerve_dimension(&self) -> isize {
        simplicial::nerve(&self.inner).dimension()
    }

    fn __repr__(&self) -> String {
        format!("Cover(members={}, order={})", self.inner.len(), self.inner.order())
    }
}

/// Staged block subshift aimed at a rational mean dimension.
#[pyclass(name = "BlockSystem", frozen)]
struct PyBlockSystem {
    inner: BlockSystem,
}

#[pymethods]
impl PyBlockSystem {
    #[new]
    #[pyo3(signature = (r, stages=5, alphabet=2))]
    fn new(r: &str, stages: usize, alphabet: usize) -> PyResult<Self> {
        let r = parse_q(r).map_err(err)?;
        Ok(PyBlockSystem { inner: BlockSystem::build(r, stages, alphabet).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyBlockSystem { inner: BlockSystem::from_json(&parse_json(text)?).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn a_sequence(&self) -> Vec<u64> {
        self.inner.a_sequence().to_vec()
    }

    #[getter]
    fn periods(&self) -> Vec<usize> {
        self.inner.stages().iter().map(|s| s.q).collect()
    }

    #[getter]
    fn exact(&self) -> bool {
        self.inner.exact()
    }

    fn lower_bound(&self) -> String {
        self.inner.lower_bound_mdim().to_string()
    }

    fn upper_bound(&self, n: usize, k: u64) -> PyResult<String> {
        Ok(self.inner.upper_bound_mdim(n, k).map_err(err)?.to_string())
    }

    fn free_dim_ratio(&self, n: usize) -> PyResult<String> {
        Ok(self.inner.free_dim_ratio(n).map_err(err)?.to_string())
    }

    /// Returns `(successes, trials, worst distance)`.
    fn probe(&self, n: usize, trials: usize, seed: u64) -> PyResult<(usize, usize, String)> {
        let r = self.inner.minimality_probe(n, trials, seed).map_err(err)?;
        Ok((r.successes, r.trials, r.worst_distance.to_string()))
    }
}

/// Exact order of a box cover given as JSON.
#[pyfunction]
fn box_cover_order(text: &str) -> PyResult<usize> {
    let c = cube::BoxCover::from_json(&parse_json(text)?).map_err(err)?;
    cube::exact_order(&c).map_err(err)
}

/// Brick cover of `[0,1]^n` as JSON, with mesh at most `eps`.
#[pyfunction]
fn brick_cover(n: usize, eps: &str) -> PyResult<String> {
    let eps = parse_q(eps).map_err(err)?;
    Ok(cube::brick_cover(n, &eps).map_err(err)?.to_json().to_string())
}

#[pyfunction]
#[pyo3(signature = (descriptor, k_max=12))]
fn perdim(descriptor: &str, k_max: usize) -> PyResult<String> {
    let d = SymbolicSystemDescriptor::from_json(&parse_json(descriptor)?).map_err(err)?;
    Ok(dynsys::perdim(&d, k_max).map_err(err)?.to_string())
}

/// An `n`-marker of a permutation system given as JSON, as point ids.
#[pyfunction]
fn find_marker(system: &str, n: usize) -> PyResult<Option<Vec<String>>> {
    let sys = FinitePermSystem::from_json(&parse_json(system)?).map_err(err)?;
    Ok(dynsys::find_marker(&sys, n).map(|f| f.into_iter().map(|i| sys.ids()[i].clone()).collect()))
}

/// Runs acceptance criteria; returns `(id, name, passed, detail)` rows.
#[pyfunction]
#[pyo3(signature = (only=Vec::new(), seed=1))]
fn run_verify(py: Python<'_>, only: Vec<usize>, seed: u64) -> PyResult<Vec<(usize, String, bool, String)>> {
    let cfg = VerifyConfig { seed, only, ..VerifyConfig::default() };
    let rows = py.detach(|| verify::verify_all(&cfg)).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.id, r.name.to_string(), r.passed, r.detail)).collect())
}

#[pymodule]
fn meandim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCover>()?;
    m.add_class::<PyBlockSystem>()?;
    m.add_function(wrap_pyfunction!(box_cover_order, m)?)?;
    m.add_function(wrap_pyfunction!(brick_cover, m)?)?;
    m.add_function(wrap_pyfunction!(perdim, m)?)?;
    m.add_function(wrap_pyfunction!(find_marker, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
