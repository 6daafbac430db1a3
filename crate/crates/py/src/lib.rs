//! Python bindings over the core crate. Wrapped types hold their Rust value;
//! bulk data crosses the boundary as JSON strings in the same formats the CLI
//! reads and writes, so files produced on either side interchange freely.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use orabench::domain;
use orabench::error::Error;
use orabench::estimation;
use orabench::genlab;
use orabench::harness;
use orabench::io;
use orabench::lp;
use orabench::pricing;
use orabench::rng::{derive_seed, stream_from_seed};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A full problem instance: n request distributions over m budgeted resources.
#[pyclass(name = "Instance")]
struct PyInstance {
    inner: domain::Instance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::instance_from_json(text).map(|inner| Self { inner }).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        io::instance_to_json(&self.inner).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn budgets(&self) -> Vec<f64> {
        self.inner.budgets.clone()
    }

    /// The same distributions under different budgets.
    fn with_budgets(&self, budgets: Vec<f64>) -> PyResult<Self> {
        domain::Instance::new(self.inner.m, budgets, self.inner.distributions.clone())
            .map(|inner| Self { inner })
            .map_err(err)
    }

    /// Human-readable constraint violations; empty means valid.
    fn validate(&self) -> Vec<String> {
        domain::validate_instance(&self.inner).iter().map(|v| v.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, m={})", self.inner.n(), self.inner.m)
    }
}

/// Benchmark and per-step consumption estimates feeding the pricing loop.
#[pyclass(name = "Estimates")]
struct PyEstimates {
    inner: pricing::Estimates,
}

#[pymethods]
impl PyEstimates {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::estimates_from_json(text).map(|inner| Self { inner }).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        io::estimates_to_json(&self.inner).map_err(err)
    }

    #[getter]
    fn opt_hat(&self) -> f64 {
        self.inner.opt_hat
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn a_hat(&self) -> Vec<Vec<f64>> {
        self.inner.a_hat.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Estimates(opt_hat={}, beta={}, n={})",
            self.inner.opt_hat,
            self.inner.beta,
            self.inner.a_hat.len()
        )
    }
}

/// Full record of one run: per-step prices and decisions plus audit counters.
#[pyclass(name = "Trace")]
struct PyTrace {
    inner: domain::Trace,
    budgets: Vec<f64>,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn total_value(&self) -> f64 {
        self.inner.total_value
    }

    #[getter]
    fn stop_time(&self) -> usize {
        self.inner.stop_time
    }

    #[getter]
    fn terminated_early(&self) -> bool {
        self.inner.terminated_early
    }

    #[getter]
    fn guard_activations(&self) -> u64 {
        self.inner.guard_activations
    }

    #[getter]
    fn max_utilization(&self) -> f64 {
        self.inner.max_utilization(&self.budgets)
    }

    /// Posted price vector at each recorded step.
    fn prices(&self) -> Vec<Vec<f64>> {
        self.inner.steps.iter().map(|s| s.prices.clone()).collect()
    }

    /// Chosen decision id at each recorded step; 0 is the null decision.
    fn chosen(&self) -> Vec<usize> {
        self.inner.steps.iter().map(|s| s.chosen).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(stop_time={}, total_value={}, terminated_early={})",
            self.inner.stop_time, self.inner.total_value, self.inner.terminated_early
        )
    }
}

/// The budget lower-bound construction: single-minded buyers over 2^z items.
#[pyclass(name = "HardInstance")]
struct PyHardInstance {
    inner: genlab::HardInstance,
}

#[pymethods]
impl PyHardInstance {
    #[getter]
    fn z(&self) -> usize {
        self.inner.z
    }

    #[getter]
    fn b(&self) -> usize {
        self.inner.b
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    fn instance(&self) -> PyInstance {
        PyInstance { inner: self.inner.instance.clone() }
    }

    /// Exact offline optimum of one seeded realization.
    fn offline_opt(&self, seed: u64) -> PyResult<f64> {
        let requests = domain::realize_instance(&self.inner.instance, seed);
        genlab::hard_instance_offline_opt(&self.inner, &requests).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("HardInstance(z={}, B={})", self.inner.z, self.inner.b)
    }
}

/// Builds a prophet instance from a generator config JSON object.
#[pyfunction]
fn generate(config_json: &str) -> PyResult<PyInstance> {
    let cfg: genlab::GeneratorConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    genlab::gen_prophet_instance(&cfg).map(|inner| PyInstance { inner }).map_err(err)
}

/// Configuration-LP optimum: an upper bound on the expected offline optimum.
#[pyfunction]
fn lp_upper_bound(inst: &PyInstance) -> PyResult<f64> {
    lp::lp_upper_bound(&inst.inner).map_err(err)
}

/// Exact estimates from the known distributions, for the full-information run.
#[pyfunction]
fn known_distribution_estimates(inst: &PyInstance, epsilon: f64) -> PyResult<PyEstimates> {
    pricing::known_distribution_estimates(&inst.inner, epsilon)
        .map(|inner| PyEstimates { inner })
        .map_err(err)
}

/// Estimates from one seeded sample realization, via the split-and-solve
/// pipeline. Seed derivation matches the experiment harness, so trial `t` of
/// a harness run is reproducible from here with the same derived seed.
#[pyfunction]
#[pyo3(signature = (inst, epsilon, seed, partitions=None))]
fn single_sample_estimates(
    inst: &PyInstance,
    epsilon: f64,
    seed: u64,
    partitions: Option<usize>,
) -> PyResult<PyEstimates> {
    let sample = domain::realize_instance(&inst.inner, derive_seed(seed, 1));
    let d = partitions.unwrap_or_else(|| estimation::default_partition_count(inst.inner.n()));
    let mut rng = stream_from_seed(derive_seed(seed, 2));
    estimation::single_sample_pipeline(&sample, &inst.inner.budgets, epsilon, d, &mut rng)
        .map(|inner| PyEstimates { inner })
        .map_err(err)
}

/// One seeded run of the exponential pricing loop.
#[pyfunction]
fn run_pricing(inst: &PyInstance, est: &PyEstimates, epsilon: f64, seed: u64) -> PyResult<PyTrace> {
    pricing::run_exponential_pricing(&inst.inner, &est.inner, epsilon, seed)
        .map(|inner| PyTrace { inner, budgets: inst.inner.budgets.clone() })
        .map_err(err)
}

/// Single-sample estimates plus a fresh run, seeded like one harness trial.
#[pyfunction]
#[pyo3(signature = (inst, epsilon, seed, partitions=None))]
fn run_single_sample(
    inst: &PyInstance,
    epsilon: f64,
    seed: u64,
    partitions: Option<usize>,
) -> PyResult<PyTrace> {
    let est = single_sample_estimates(inst, epsilon, seed, partitions)?;
    pricing::run_exponential_pricing(&inst.inner, &est.inner, epsilon, derive_seed(seed, 3))
        .map(|inner| PyTrace { inner, budgets: inst.inner.budgets.clone() })
        .map_err(err)
}

/// Exponential pricing with an oblivious value-perturbation plan (sparse
/// triplet JSON). Returns the trace and the unperturbed value it collected.
#[pyfunction]
fn run_augmented(
    inst: &PyInstance,
    plan_json: &str,
    epsilon: f64,
    seed: u64,
) -> PyResult<(PyTrace, f64)> {
    let plan = io::plan_from_json(plan_json).map_err(err)?;
    let run = orabench::augmentation::run_augmented_pricing(&inst.inner, &plan, epsilon, seed)
        .map_err(err)?;
    Ok((
        PyTrace { inner: run.trace, budgets: inst.inner.budgets.clone() },
        run.base_total_value,
    ))
}

#[pyfunction]
fn gen_hard(z: usize, b: usize) -> PyResult<PyHardInstance> {
    genlab::gen_hard_instance(z, b).map(|inner| PyHardInstance { inner }).map_err(err)
}

/// Minimum prefix slack of the no-regret certificate and whether it holds.
#[pyfunction]
fn no_regret_min_slack(r: Vec<f64>, lambda_init: f64, delta: f64) -> PyResult<(f64, bool)> {
    pricing::no_regret_min_slack(&r, lambda_init, delta).map_err(err)
}

/// Two-sided tail bound for the mean of n iid variables in [a, b].
#[pyfunction]
fn hoeffding_bound(n: usize, a: f64, b: f64, epsilon: f64) -> PyResult<f64> {
    harness::concentration_bound(&harness::BoundKind::Hoeffding { n, a, b, epsilon }).map_err(err)
}

/// One-sided tail bound for a sum with total variance sigma2 and |X| <= m.
#[pyfunction]
fn bernstein_bound(sigma2: f64, m: f64, epsilon: f64) -> PyResult<f64> {
    harness::concentration_bound(&harness::BoundKind::Bernstein { sigma2, m, epsilon }).map_err(err)
}

/// Two-sided tail bound for sampling v of u values in [0, m] without
/// replacement, around mean mu with deviation tau.
#[pyfunction]
fn swor_bound(u: usize, v: usize, m: f64, mu: f64, tau: f64) -> PyResult<f64> {
    harness::concentration_bound(&harness::BoundKind::BernsteinSwor { u, v, m, mu, tau })
        .map_err(err)
}

/// Runs a full experiment from a config JSON object and returns the report
/// (config echo plus one row per trial) as JSON.
#[pyfunction]
fn run_experiment_json(config_json: &str) -> PyResult<String> {
    let cfg = io::config_from_json(config_json).map_err(err)?;
    let report = harness::run_experiment(&cfg).map_err(err)?;
    serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn orabench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyEstimates>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyHardInstance>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(lp_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(known_distribution_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(single_sample_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(run_pricing, m)?)?;
    m.add_function(wrap_pyfunction!(run_single_sample, m)?)?;
    m.add_function(wrap_pyfunction!(run_augmented, m)?)?;
    m.add_function(wrap_pyfunction!(gen_hard, m)?)?;
    m.add_function(wrap_pyfunction!(no_regret_min_slack, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bernstein_bound, m)?)?;
    m.add_function(wrap_pyfunction!(swor_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_json, m)?)?;
    Ok(())
}
