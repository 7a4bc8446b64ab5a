//! Python bindings for `dpkit`.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dpkit::dataset::{self, CountingQuerySet, Dataset};
use dpkit::divergence::{self, DiscreteDistribution};
use dpkit::mechanisms::BudgetTree;
use dpkit::rng::RandomSource;
use dpkit::{rnm, DpError};

fn py_err(e: DpError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `(ε, δ)` privacy budget.
#[pyclass(name = "PrivacyBudget", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPrivacyBudget(dpkit::PrivacyBudget);

#[pymethods]
impl PyPrivacyBudget {
    #[new]
    #[pyo3(signature = (epsilon, delta = 0.0))]
    fn new(epsilon: f64, delta: f64) -> PyResult<Self> {
        dpkit::PrivacyBudget::new(epsilon, delta).map(Self).map_err(py_err)
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    fn add(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    fn weaken(&self, looser: &Self) -> PyResult<Self> {
        self.0.weaken(&looser.0).map(Self).map_err(py_err)
    }

    fn group(&self, k: u64) -> PyResult<Self> {
        self.0.group(k).map(Self).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("PrivacyBudget(epsilon={}, delta={})", self.0.epsilon, self.0.delta)
    }
}

/// Laplace distribution with the given scale and location.
#[pyclass(name = "Laplace", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLaplace(dpkit::Laplace);

#[pymethods]
impl PyLaplace {
    #[new]
    #[pyo3(signature = (scale, location = 0.0))]
    fn new(scale: f64, location: f64) -> Self {
        Self(dpkit::Laplace::new(scale, location))
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale
    }

    #[getter]
    fn location(&self) -> f64 {
        self.0.location
    }

    fn pdf(&self, x: f64) -> PyResult<f64> {
        self.0.pdf(x).map_err(py_err)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        self.0.quantile(p).map_err(py_err)
    }

    fn interval_prob(&self, lo: f64, hi: f64) -> PyResult<f64> {
        self.0.interval_prob(lo, hi).map_err(py_err)
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RandomSource::new(seed);
        (0..n).map(|_| self.0.sample(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Laplace(scale={}, location={})", self.0.scale, self.0.location)
    }
}

#[pyfunction]
fn dist_l1(xs: Vec<u64>, ys: Vec<u64>) -> PyResult<u64> {
    dataset::dist_l1(&Dataset::new(xs), &Dataset::new(ys)).map_err(py_err)
}

#[pyfunction]
fn is_adjacent(xs: Vec<u64>, ys: Vec<u64>, k: u64) -> PyResult<bool> {
    dataset::is_adjacent(&Dataset::new(xs), &Dataset::new(ys), k).map_err(py_err)
}

#[pyfunction]
fn counting_query(n: usize, queries: Vec<Vec<usize>>, xs: Vec<u64>) -> PyResult<Vec<u64>> {
    let q = CountingQuerySet::new(n, queries).map_err(py_err)?;
    Ok(dataset::counting_query(&q, &Dataset::new(xs)))
}

/// Hockey-stick divergence between two probability tables.
#[pyfunction]
fn divergence_discrete(mu: BTreeMap<String, f64>, nu: BTreeMap<String, f64>, epsilon: f64) -> PyResult<f64> {
    let mu = DiscreteDistribution::new(mu).map_err(py_err)?;
    let nu = DiscreteDistribution::new(nu).map_err(py_err)?;
    Ok(divergence::divergence_discrete(&mu, &nu, epsilon).value)
}

#[pyfunction]
#[pyo3(signature = (scale, x, y, epsilon, tol = 1e-9))]
fn divergence_laplace_pair(scale: f64, x: f64, y: f64, epsilon: f64, tol: f64) -> PyResult<f64> {
    divergence::divergence_laplace_pair(scale, x, y, epsilon, tol)
        .map(|r| r.value)
        .map_err(py_err)
}

/// `(max, argmax)`; the empty list gives `(-inf, 0)`.
#[pyfunction]
fn max_argmax(xs: Vec<f64>) -> (f64, usize) {
    let (m, i) = rnm::max_argmax(&xs);
    (m.to_f64(), i)
}

#[pyfunction]
fn argmax_list(xs: Vec<f64>) -> usize {
    rnm::argmax_list(&xs)
}

#[pyfunction]
fn argmax_insert(k: f64, ks: Vec<f64>, i: usize) -> PyResult<usize> {
    rnm::argmax_insert(k, &ks, i).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (scores, epsilon, i, tol = 1e-9))]
fn rnm_prob_exact(scores: Vec<f64>, epsilon: f64, i: usize, tol: f64) -> PyResult<f64> {
    rnm::rnm_prob_exact(&scores, epsilon, i, tol).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (scores, epsilon, tol = 1e-9))]
fn rnm_distribution(scores: Vec<f64>, epsilon: f64, tol: f64) -> PyResult<Vec<f64>> {
    rnm::rnm_distribution(&scores, epsilon, tol).map_err(py_err)
}

/// `n` report-noisy-max draws on fixed scores.
#[pyfunction]
fn rnm_sample(scores: Vec<f64>, epsilon: f64, n: usize, seed: u64) -> PyResult<Vec<usize>> {
    let mut rng = RandomSource::new(seed);
    (0..n)
        .map(|_| rnm::rnm_sample_scores(&scores, epsilon, &mut rng))
        .collect::<Result<_, _>>()
        .map_err(py_err)
}

/// Exhaustive RNM ratio check for one query set; returns a summary dict.
#[pyfunction]
#[pyo3(signature = (n, queries, epsilon, max_entry = 2, tol = 1e-9))]
fn verify_rnm<'py>(
    py: Python<'py>,
    n: usize,
    queries: Vec<Vec<usize>>,
    epsilon: f64,
    max_entry: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let q = CountingQuerySet::new(n, queries).map_err(py_err)?;
    let r = rnm::verify_rnm_dp_finer(&q, epsilon, max_entry, tol, dataset::DEFAULT_ENUMERATION_LIMIT)
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("max_ratio", r.max_ratio)?;
    d.set_item("finer_bound", r.finer_bound)?;
    d.set_item("naive_bound", r.naive_bound)?;
    d.set_item("pairs", r.pairs)?;
    d.set_item("unstable_cells", r.unstable_cells)?;
    d.set_item("pass", r.pass)?;
    Ok(d)
}

/// Folds a composition tree given as JSON.
#[pyfunction]
fn budget_total(tree_json: &str) -> PyResult<PyPrivacyBudget> {
    let tree: BudgetTree = serde_json::from_str(tree_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    tree.total().map(PyPrivacyBudget).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "dpkit")]
fn dpkit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPrivacyBudget>()?;
    m.add_class::<PyLaplace>()?;
    m.add_function(wrap_pyfunction!(dist_l1, m)?)?;
    m.add_function(wrap_pyfunction!(is_adjacent, m)?)?;
    m.add_function(wrap_pyfunction!(counting_query, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_laplace_pair, m)?)?;
    m.add_function(wrap_pyfunction!(max_argmax, m)?)?;
    m.add_function(wrap_pyfunction!(argmax_list, m)?)?;
    m.add_function(wrap_pyfunction!(argmax_insert, m)?)?;
    m.add_function(wrap_pyfunction!(rnm_prob_exact, m)?)?;
    m.add_function(wrap_pyfunction!(rnm_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(rnm_sample, m)?)?;
    m.add_function(wrap_pyfunction!(verify_rnm, m)?)?;
    m.add_function(wrap_pyfunction!(budget_total, m)?)?;
    Ok(())
}
