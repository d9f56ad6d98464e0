//! Python bindings for the forecasters, kernel utilities and harness.

use std::sync::Mutex;
use std::time::Duration;

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pkawv_core::exact::ExactKawv;
use pkawv_core::fogd::{FogdConfig, FogdForecaster};
use pkawv_core::harness::{self, Algo, Dataset, HarnessConfig, RunRecord, Task};
use pkawv_core::nystrom::{KorsConfig, NystromForecaster};
use pkawv_core::taylor::{self, TaylorForecaster};
use pkawv_core::{Error, KernelSpec};

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Protocol(_) => PyRuntimeError::new_err(msg),
        Error::Numeric(_) => PyArithmeticError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn kernel(sigma: f64) -> PyResult<KernelSpec> {
    KernelSpec::gaussian(sigma).map_err(py_err)
}

type Record = (usize, f64, f64, f64, f64, u64, usize);

#[pyfunction]
fn kernel_eval(x: Vec<f64>, y: Vec<f64>, sigma: f64) -> PyResult<f64> {
    kernel(sigma)?.eval(&x, &y).map_err(py_err)
}

#[pyfunction]
fn gram(points: Vec<Vec<f64>>, sigma: f64) -> PyResult<Vec<Vec<f64>>> {
    let g = kernel(sigma)?.gram(&points).map_err(py_err)?;
    let m = g.matrix();
    Ok(m.row_iter().map(|r| r.iter().copied().collect()).collect())
}

#[pyfunction]
fn effective_dimension(points: Vec<Vec<f64>>, sigma: f64, lam: f64) -> PyResult<f64> {
    let g = kernel(sigma)?.gram(&points).map_err(py_err)?;
    pkawv_core::effective_dimension(&g, lam).map_err(py_err)
}

/// Returns `(spectral, relaxed, effective_dimension)`.
#[pyfunction]
#[pyo3(signature = (points, sigma, lam, b=1.0, f_norm_sq=0.0))]
fn spectral_regret_bound(
    points: Vec<Vec<f64>>,
    sigma: f64,
    lam: f64,
    b: f64,
    f_norm_sq: f64,
) -> PyResult<(f64, f64, f64)> {
    let k = kernel(sigma)?;
    let g = k.gram(&points).map_err(py_err)?;
    let s = pkawv_core::spectral_regret_bound(&g, lam, b, f_norm_sq, k.kappa()).map_err(py_err)?;
    Ok((s.spectral, s.relaxed, s.effective_dimension))
}

#[pyfunction]
fn choose_m(radius: f64, sigma: f64, n: usize, lam: f64) -> u32 {
    taylor::choose_m(radius, sigma, n, lam)
}

#[pyfunction]
fn truncation_bound(max_degree: u32, radius: f64, sigma: f64) -> f64 {
    taylor::truncation_bound(max_degree, radius, sigma)
}

#[pyclass(frozen)]
struct TaylorBasis(taylor::TaylorBasis);

#[pymethods]
impl TaylorBasis {
    #[new]
    #[pyo3(signature = (max_degree, dim, sigma=1.0))]
    fn new(max_degree: u32, dim: usize, sigma: f64) -> PyResult<Self> {
        taylor::TaylorBasis::new(max_degree, dim, sigma)
            .map(Self)
            .map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn indices(&self) -> Vec<Vec<u32>> {
        self.0.indices().iter().map(|k| k.as_slice().to_vec()).collect()
    }

    fn embed(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.embed(&x).map_err(py_err)
    }

    fn reconstruction_error(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.0.reconstruction_error(&x, &y).map_err(py_err)
    }
}

/// Any of the online forecasters behind one predict/update interface.
#[pyclass(frozen)]
struct Forecaster(Mutex<Box<dyn pkawv_core::Forecaster>>);

impl Forecaster {
    fn wrap(f: impl pkawv_core::Forecaster + 'static) -> Self {
        Self(Mutex::new(Box::new(f)))
    }

    fn with<T>(&self, op: impl FnOnce(&mut dyn pkawv_core::Forecaster) -> T) -> T {
        let mut guard = self.0.lock().unwrap_or_else(|p| p.into_inner());
        op(guard.as_mut())
    }
}

#[pymethods]
impl Forecaster {
    #[staticmethod]
    #[pyo3(signature = (sigma=1.0, lam=1.0))]
    fn exact(sigma: f64, lam: f64) -> PyResult<Self> {
        Ok(Self::wrap(ExactKawv::new(kernel(sigma)?, lam).map_err(py_err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (max_degree, dim, sigma=1.0, lam=1.0))]
    fn taylor(max_degree: u32, dim: usize, sigma: f64, lam: f64) -> PyResult<Self> {
        let basis = taylor::TaylorBasis::new(max_degree, dim, sigma).map_err(py_err)?;
        Ok(Self::wrap(TaylorForecaster::new(basis, lam).map_err(py_err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (sigma=1.0, lam=1.0, mu=1.0, beta=1.0, eps=0.5, delta=0.1, seed=0))]
    fn nystrom(
        sigma: f64,
        lam: f64,
        mu: f64,
        beta: f64,
        eps: f64,
        delta: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let kors = KorsConfig::new(mu, beta, eps, delta, seed).map_err(py_err)?;
        Ok(Self::wrap(
            NystromForecaster::new(kernel(sigma)?, lam, kors).map_err(py_err)?,
        ))
    }

    #[staticmethod]
    #[pyo3(signature = (inputs, sigma=1.0, lam=1.0, mu=1.0, beta=1.0, eps=0.5, delta=0.1, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn nystrom_beforehand(
        inputs: Vec<Vec<f64>>,
        sigma: f64,
        lam: f64,
        mu: f64,
        beta: f64,
        eps: f64,
        delta: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let kors = KorsConfig::new(mu, beta, eps, delta, seed).map_err(py_err)?;
        Ok(Self::wrap(
            NystromForecaster::beforehand(kernel(sigma)?, lam, kors, &inputs).map_err(py_err)?,
        ))
    }

    /// `eta` defaults to `1/sqrt(n)`.
    #[staticmethod]
    #[pyo3(signature = (dim, n, sigma=1.0, features=1000, eta=None, seed=0))]
    fn fogd(
        dim: usize,
        n: usize,
        sigma: f64,
        features: usize,
        eta: Option<f64>,
        seed: u64,
    ) -> PyResult<Self> {
        let mut cfg = FogdConfig::with_defaults(n, sigma, seed);
        cfg.features = features;
        if let Some(eta) = eta {
            cfg.eta = eta;
        }
        Ok(Self::wrap(FogdForecaster::new(cfg, dim).map_err(py_err)?))
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<f64> {
        self.with(|f| f.predict(&x)).map_err(py_err)
    }

    fn update(&self, y: f64) -> PyResult<()> {
        self.with(|f| f.update(y)).map_err(py_err)
    }

    /// Prediction at `x` without advancing the state.
    fn peek(&self, x: Vec<f64>) -> PyResult<f64> {
        self.with(|f| f.peek(&x)).map_err(py_err)
    }

    #[getter]
    fn rounds(&self) -> usize {
        self.with(|f| f.rounds())
    }

    #[getter]
    fn dict_size(&self) -> usize {
        self.with(|f| f.dict_size())
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.with(|f| f.name())
    }

    fn __repr__(&self) -> String {
        self.with(|f| format!("Forecaster({}, rounds={})", f.name(), f.rounds()))
    }
}

#[pyclass(frozen, get_all)]
struct RegretLedger {
    learner_loss: f64,
    comparator_loss: f64,
    comparator_norm_sq: f64,
    regret: f64,
    bound_prop21: f64,
    bound_satisfied: bool,
}

#[allow(clippy::too_many_arguments)]
fn config(
    algo: &str,
    lam: f64,
    sigma: f64,
    max_degree: Option<u32>,
    mu: f64,
    beta: f64,
    eps: f64,
    delta: f64,
    features: usize,
    eta: Option<f64>,
    seed: u64,
    task: &str,
) -> PyResult<HarnessConfig> {
    Ok(HarnessConfig {
        algo: algo.parse::<Algo>().map_err(py_err)?,
        lambda: lam,
        sigma,
        max_degree,
        mu,
        beta,
        eps,
        delta,
        features,
        eta,
        seed,
        task: task.parse::<Task>().map_err(py_err)?,
        ..HarnessConfig::default()
    })
}

fn dataset(inputs: Vec<Vec<f64>>, labels: Vec<f64>) -> PyResult<Dataset> {
    Dataset::new(inputs, labels).map_err(py_err)
}

/// Streams `(inputs, labels)` through a forecaster; returns one tuple per
/// round in the order `t, y, yhat, loss, cum_loss, elapsed_ns, dict_size`.
#[pyfunction]
#[pyo3(signature = (
    algo, inputs, labels, lam=1.0, sigma=1.0, max_degree=None, mu=1.0, beta=1.0, eps=0.5,
    delta=0.1, features=1000, eta=None, seed=0, task="regression", limit_n=None, timeout_s=None
))]
#[allow(clippy::too_many_arguments)]
fn run_stream(
    algo: &str,
    inputs: Vec<Vec<f64>>,
    labels: Vec<f64>,
    lam: f64,
    sigma: f64,
    max_degree: Option<u32>,
    mu: f64,
    beta: f64,
    eps: f64,
    delta: f64,
    features: usize,
    eta: Option<f64>,
    seed: u64,
    task: &str,
    limit_n: Option<usize>,
    timeout_s: Option<f64>,
) -> PyResult<Vec<Record>> {
    let mut cfg = config(
        algo, lam, sigma, max_degree, mu, beta, eps, delta, features, eta, seed, task,
    )?;
    cfg.limit_n = limit_n;
    cfg.timeout = timeout_s.map(Duration::from_secs_f64);
    let data = dataset(inputs, labels)?;
    let out = harness::run_stream(&cfg, &data).map_err(py_err)?;
    Ok(out
        .records
        .iter()
        .map(|r| (r.t, r.y, r.yhat, r.loss, r.cum_loss, r.elapsed_ns, r.dict_size))
        .collect())
}

/// Regret of `predictions` against kernel ridge fitted on the same examples.
#[pyfunction]
#[pyo3(signature = (inputs, labels, predictions, sigma=1.0, lam=1.0, b=1.0))]
fn regret_report(
    inputs: Vec<Vec<f64>>,
    labels: Vec<f64>,
    predictions: Vec<f64>,
    sigma: f64,
    lam: f64,
    b: f64,
) -> PyResult<RegretLedger> {
    let data = dataset(inputs, labels)?;
    let mut cum = 0.0;
    let records: Vec<RunRecord> = predictions
        .iter()
        .zip(&data.labels)
        .enumerate()
        .map(|(i, (&yhat, &y))| {
            let loss = (y - yhat) * (y - yhat);
            cum += loss;
            RunRecord {
                t: i + 1,
                y,
                yhat,
                loss,
                cum_loss: cum,
                elapsed_ns: 0,
                dict_size: 0,
            }
        })
        .collect();
    let l = harness::regret_report(&records, &data, kernel(sigma)?, lam, b).map_err(py_err)?;
    Ok(RegretLedger {
        learner_loss: l.learner_loss,
        comparator_loss: l.comparator_loss,
        comparator_norm_sq: l.comparator_norm_sq,
        regret: l.regret,
        bound_prop21: l.bound_prop21,
        bound_satisfied: l.bound_satisfied,
    })
}

/// Greedy grid adversary; returns the generated `(inputs, labels)`.
#[pyfunction]
#[pyo3(signature = (algo, n, dim, grid_points, y_grid, lam=1.0, sigma=1.0, max_degree=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn adversary_generate(
    algo: &str,
    n: usize,
    dim: usize,
    grid_points: usize,
    y_grid: Vec<f64>,
    lam: f64,
    sigma: f64,
    max_degree: Option<u32>,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let cfg = config(
        algo, lam, sigma, max_degree, 1.0, 1.0, 0.5, 0.1, 1000, None, seed, "regression",
    )?;
    let f = cfg
        .build_for(dim, n, (dim as f64).sqrt(), None)
        .map_err(py_err)?;
    let out = harness::adversary_generate(f, kernel(sigma)?, lam, n, dim, grid_points, &y_grid)
        .map_err(py_err)?;
    Ok((out.data.inputs, out.data.labels))
}

/// Rows of `(algorithm, gamma, a, b)`.
#[pyfunction]
fn emit_rates(gamma: f64, a_grid: Vec<f64>) -> PyResult<Vec<(String, f64, f64, f64)>> {
    let q = harness::RateQuery::new(gamma, a_grid).map_err(py_err)?;
    Ok(harness::emit_rates(&q)
        .into_iter()
        .map(|r| (r.algorithm.to_string(), r.gamma, r.a, r.b))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (path, format="csv", label_column=None))]
fn ingest(
    path: &str,
    format: &str,
    label_column: Option<usize>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let fmt = format.parse().map_err(py_err)?;
    let d = harness::ingest(path, fmt, label_column).map_err(py_err)?;
    Ok((d.inputs, d.labels))
}

#[pyfunction]
fn scale(inputs: Vec<Vec<f64>>, labels: Vec<f64>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let d = harness::scale(&dataset(inputs, labels)?);
    Ok((d.inputs, d.labels))
}

#[pymodule]
fn pkawv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TaylorBasis>()?;
    m.add_class::<Forecaster>()?;
    m.add_class::<RegretLedger>()?;
    m.add_function(wrap_pyfunction!(kernel_eval, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(effective_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_regret_bound, m)?)?;
    m.add_function(wrap_pyfunction!(choose_m, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_stream, m)?)?;
    m.add_function(wrap_pyfunction!(regret_report, m)?)?;
    m.add_function(wrap_pyfunction!(adversary_generate, m)?)?;
    m.add_function(wrap_pyfunction!(emit_rates, m)?)?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(scale, m)?)?;
    Ok(())
}
