//! Python bindings. Results with nested structure are returned as plain
//! dicts, built from the same JSON serialization the CLI emits.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyList;
use serde::Serialize;

use twodsd::dominance::default_tolerance;
use twodsd::scenarios::{mvr_estimates, PowerCurveConfig};
use twodsd::{BootstrapConfig, Direction, Method, OrderKind, Parallelism, ScenarioSpec, TestSpec, Variant};

create_exception!(twodsd, TwodsdError, PyValueError);

fn err(e: twodsd::Error) -> PyErr {
    TwodsdError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = twodsd::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn parallelism(workers: usize) -> Parallelism {
    if workers == 0 {
        Parallelism::Auto
    } else {
        Parallelism::Workers(workers)
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn scenario(id: &str) -> PyResult<ScenarioSpec> {
    ScenarioSpec::builtin(id).map_err(err)
}

/// An immutable sample of finite values, stored sorted.
#[pyclass(frozen, skip_from_py_object, module = "twodsd")]
#[derive(Clone)]
pub struct Sample {
    inner: twodsd::Sample,
}

#[pymethods]
impl Sample {
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: twodsd::Sample::new(values).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Sample(n={}, min={}, max={}, mean={})",
            self.inner.len(),
            self.inner.min(),
            self.inner.max(),
            self.inner.mean()
        )
    }

    /// Sorted values.
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn min(&self) -> f64 {
        self.inner.min()
    }

    #[getter]
    fn max(&self) -> f64 {
        self.inner.max()
    }

    fn gini(&self) -> PyResult<f64> {
        twodsd::empirical::gini(&self.inner).map_err(err)
    }
}

/// Accepts either a `Sample` or any sequence of floats.
fn as_sample(obj: &Bound<'_, PyAny>) -> PyResult<twodsd::Sample> {
    if let Ok(s) = obj.cast::<Sample>() {
        return Ok(s.get().inner.clone());
    }
    let values: Vec<f64> = obj.extract()?;
    twodsd::Sample::new(values).map_err(err)
}

/// The pair `(∫(s₁ - s₂), ∫|s₁ - s₂|)` for one order.
#[pyclass(frozen, skip_from_py_object, module = "twodsd")]
#[derive(Clone)]
pub struct Index {
    inner: twodsd::Index2DSD,
}

#[pymethods]
impl Index {
    #[getter]
    fn signed(&self) -> f64 {
        self.inner.signed
    }

    #[getter]
    fn abs(&self) -> f64 {
        self.inner.abs
    }

    #[getter]
    fn order(&self) -> &'static str {
        self.inner.order.name()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        (self.inner.domain.lo, self.inner.domain.hi)
    }

    /// Minimum violation ratio for the hypothesis that the first sample is
    /// dominated, or the second one when `direction` says so.
    #[pyo3(signature = (direction = "first_dominated"))]
    fn mvr(&self, direction: &str) -> PyResult<f64> {
        let mut idx = self.inner;
        if parse::<Direction>(direction)? == Direction::SecondDominated {
            idx = idx.reversed();
        }
        Ok(twodsd::mvr(&idx).epsilon0)
    }

    /// Region of the index for violation ratio `epsilon`.
    #[pyo3(signature = (epsilon, tol = None))]
    fn classify(&self, py: Python<'_>, epsilon: f64, tol: Option<f64>) -> PyResult<Py<PyAny>> {
        let tol = tol.unwrap_or_else(|| default_tolerance(&self.inner));
        let c = twodsd::classify(&self.inner, epsilon, tol).map_err(err)?;
        to_py(py, &c.region)
    }

    fn __repr__(&self) -> String {
        format!(
            "Index(order={}, signed={}, abs={})",
            self.inner.order, self.inner.signed, self.inner.abs
        )
    }
}

/// 2DSD index of `(x1, x2)`.
#[pyfunction]
#[pyo3(signature = (x1, x2, order = "first"))]
fn index(x1: &Bound<'_, PyAny>, x2: &Bound<'_, PyAny>, order: &str) -> PyResult<Index> {
    let (a, b) = (as_sample(x1)?, as_sample(x2)?);
    let inner = twodsd::index(&a, &b, parse(order)?).map_err(err)?;
    Ok(Index { inner })
}

/// Minimum violation ratio of `(x1, x2)` for the declared direction.
#[pyfunction]
#[pyo3(signature = (x1, x2, order = "first", direction = "first_dominated"))]
fn mvr(x1: &Bound<'_, PyAny>, x2: &Bound<'_, PyAny>, order: &str, direction: &str) -> PyResult<f64> {
    index(x1, x2, order)?.mvr(direction)
}

/// Bootstrap test of almost stochastic dominance. Returns the full result
/// as a dict.
#[pyfunction]
#[pyo3(signature = (
    x1, x2, epsilon, *, variant = "a", alpha = 0.05, method = "case1", order = "first",
    direction = "first_dominated", replicates = 2000, seed = 0, c = 0.01, workers = 0
))]
#[allow(clippy::too_many_arguments)]
fn run_test(
    py: Python<'_>,
    x1: &Bound<'_, PyAny>,
    x2: &Bound<'_, PyAny>,
    epsilon: f64,
    variant: &str,
    alpha: f64,
    method: &str,
    order: &str,
    direction: &str,
    replicates: usize,
    seed: u64,
    c: f64,
    workers: usize,
) -> PyResult<Py<PyAny>> {
    let (a, b) = (as_sample(x1)?, as_sample(x2)?);
    let spec = TestSpec {
        variant: parse::<Variant>(variant)?,
        epsilon,
        alpha,
        method: parse::<Method>(method)?,
        order: parse::<OrderKind>(order)?,
        direction: parse::<Direction>(direction)?,
    };
    let cfg = BootstrapConfig::new(replicates, seed)
        .with_c(c)
        .with_parallelism(parallelism(workers));
    let result = py.detach(|| twodsd::run_test(&a, &b, &spec, &cfg)).map_err(err)?;
    to_py(py, &result)
}

/// Population MVR of a built-in scenario ("1", "2", "3" or "4sub").
#[pyfunction]
fn oracle(py: Python<'_>, scenario_id: &str) -> PyResult<Py<PyAny>> {
    let sc = scenario(scenario_id)?;
    let result = py.detach(|| sc.oracle()).map_err(err)?;
    to_py(py, &result)
}

/// The sample pair a scenario simulation draws in Monte Carlo run `run`.
#[pyfunction]
#[pyo3(signature = (scenario_id, n, seed = 0, run = 0))]
fn draw_pair(scenario_id: &str, n: usize, seed: u64, run: u64) -> PyResult<(Sample, Sample)> {
    let (a, b) = scenario(scenario_id)?.draw_pair(n, seed, run).map_err(err)?;
    Ok((Sample { inner: a }, Sample { inner: b }))
}

/// Rejection rate of test (a) along an epsilon grid.
#[pyfunction]
#[pyo3(signature = (
    scenario_id, epsilon_grid, *, n = 1000, runs = 100, replicates = 500, alpha = 0.05,
    method = "case1", c = 0.01, seed = 0, workers = 0
))]
#[allow(clippy::too_many_arguments)]
fn power_curve(
    py: Python<'_>,
    scenario_id: &str,
    epsilon_grid: Vec<f64>,
    n: usize,
    runs: usize,
    replicates: usize,
    alpha: f64,
    method: &str,
    c: f64,
    seed: u64,
    workers: usize,
) -> PyResult<Py<PyAny>> {
    let sc = scenario(scenario_id)?;
    let cfg = PowerCurveConfig {
        n,
        runs,
        replicates,
        alpha,
        epsilon_grid,
        method: parse(method)?,
        c,
        seed,
        parallelism: parallelism(workers),
    };
    let result = py.detach(|| twodsd::power_curve(&sc, &cfg)).map_err(err)?;
    to_py(py, &result)
}

/// MVR estimates on `runs` simulated pairs of size `n`.
#[pyfunction]
#[pyo3(signature = (scenario_id, n, runs, seed = 0, workers = 0))]
fn simulate_mvr<'py>(
    py: Python<'py>,
    scenario_id: &str,
    n: usize,
    runs: usize,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyList>> {
    let sc = scenario(scenario_id)?;
    let est = py
        .detach(|| mvr_estimates(&sc, n, runs, seed, parallelism(workers)))
        .map_err(err)?;
    PyList::new(py, est)
}

#[pymodule(name = "twodsd")]
fn twodsd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TwodsdError", m.py().get_type::<TwodsdError>())?;
    m.add_class::<Sample>()?;
    m.add_class::<Index>()?;
    m.add_function(wrap_pyfunction!(index, m)?)?;
    m.add_function(wrap_pyfunction!(mvr, m)?)?;
    m.add_function(wrap_pyfunction!(run_test, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(draw_pair, m)?)?;
    m.add_function(wrap_pyfunction!(power_curve, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_mvr, m)?)?;
    Ok(())
}
