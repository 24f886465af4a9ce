//! Python bindings: scalar q-quantities, towers, the verification suite and the level walk.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use oqlab::app::{self, ModelPreset, Report};
use oqlab::qnum::{self, FusionTriple};
use oqlab::tower::ModelParams;
use oqlab::verify::{self, CheckParams, DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS};
use oqlab::{linalg, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::Fusion { .. }
        | Error::OutOfTower { .. }
        | Error::UnknownCheck { .. }
        | Error::Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn resolve(preset: &str) -> PyResult<(ModelPreset, ModelParams)> {
    let p = ModelPreset::parse(preset).map_err(to_py)?;
    let params = p.resolve().map_err(to_py)?;
    Ok((p, params))
}

/// Quantum dimension `[n+1]_q` of level `n`.
#[pyfunction]
#[pyo3(signature = (n, preset = "kac3"))]
fn qdim(n: u32, preset: &str) -> PyResult<f64> {
    let (_, params) = resolve(preset)?;
    Ok(qnum::qdim_float(n, params.q()))
}

/// `[n+1]_q` as a Laurent polynomial in q.
#[pyfunction]
fn qdim_exact(n: u32) -> String {
    qnum::qdim(n, 1.0).exact.to_string()
}

/// `(exact form, float)` of κ for the channel `t ⊂ r ⊗ s`.
#[pyfunction]
#[pyo3(signature = (r, s, t, preset = "kac3"))]
fn kappa(r: u32, s: u32, t: u32, preset: &str) -> PyResult<(String, f64)> {
    let (_, params) = resolve(preset)?;
    let triple = FusionTriple::new(r, s, t).map_err(to_py)?;
    let k = qnum::kappa(triple, params.q());
    Ok((k.exact_string(), k.value))
}

/// `(p_down, p_up)` of the level walk at level `n`.
#[pyfunction]
#[pyo3(signature = (n, preset = "kac3"))]
fn walk_weights(n: u32, preset: &str) -> PyResult<(f64, f64)> {
    let (_, params) = resolve(preset)?;
    let w = qnum::walk_weights(n, params.q());
    Ok((w.p_down, w.p_up))
}

#[pyfunction]
fn check_names() -> Vec<&'static str> {
    verify::check_names()
}

/// Walk statistics as a dict (camelCase keys, as in the CLI JSON output).
#[pyfunction]
#[pyo3(signature = (n0 = 0, steps = 100, trials = 1000, seed = DEFAULT_SEED, preset = "kac3"))]
fn simulate_walk<'py>(
    py: Python<'py>,
    n0: u32,
    steps: u32,
    trials: u32,
    seed: u64,
    preset: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let (_, params) = resolve(preset)?;
    let stats = app::simulate_walk(params.q(), n0, steps, trials, seed).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("n0", stats.n0)?;
    d.set_item("steps", stats.steps)?;
    d.set_item("trials", stats.trials)?;
    d.set_item("seed", stats.seed)?;
    d.set_item("q", stats.q)?;
    d.set_item("finalLevels", stats.final_levels)?;
    d.set_item("meanFinal", stats.mean_final)?;
    d.set_item("stdFinal", stats.std_final)?;
    d.set_item("meanIncrement", stats.mean_increment)?;
    d.set_item("incrementStdError", stats.increment_std_error)?;
    d.set_item("expectedIncrement", stats.expected_increment)?;
    d.set_item("asymptoticDrift", stats.asymptotic_drift)?;
    d.set_item("escapeFraction", stats.escape_fraction)?;
    d.set_item("aboveStartFraction", stats.above_start_fraction)?;
    Ok(d)
}

/// A truncated representation tower `H_0, …, H_L`.
#[pyclass(frozen)]
struct Tower {
    preset: ModelPreset,
    inner: oqlab::tower::Tower,
}

#[pymethods]
impl Tower {
    #[new]
    #[pyo3(signature = (preset = "kac3", max_level = 4))]
    fn new(py: Python<'_>, preset: &str, max_level: usize) -> PyResult<Self> {
        let (p, params) = resolve(preset)?;
        let inner = py.detach(|| oqlab::tower::Tower::build(params, max_level)).map_err(to_py)?;
        Ok(Self { preset: p, inner })
    }

    /// Loads `path` if it exists, otherwise builds the tower and writes it there.
    #[staticmethod]
    #[pyo3(signature = (path, preset = "kac3", max_level = 4))]
    fn cached(py: Python<'_>, path: std::path::PathBuf, preset: &str, max_level: usize) -> PyResult<Self> {
        let (p, params) = resolve(preset)?;
        let inner = py
            .detach(|| {
                if path.exists() {
                    oqlab::tower::read_cache(&path, params, max_level)
                } else {
                    app::build_and_cache(params, max_level, &path)
                }
            })
            .map_err(to_py)?;
        Ok(Self { preset: p, inner })
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    #[getter]
    fn max_level(&self) -> usize {
        self.inner.max_level()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn hash(&self) -> String {
        self.inner.params().hash_hex(self.inner.max_level())
    }

    #[getter]
    fn preset(&self) -> String {
        self.preset.to_string()
    }

    /// Operator norm of the Hermitian part of `z_block(k, n, t)`.
    fn z_norm(&self, py: Python<'_>, k: usize, n: usize, t: usize) -> PyResult<f64> {
        py.detach(|| {
            let z = oqlab::boundary::z_block(&self.inner, k, n, t)?;
            linalg::herm_norm(linalg::herm_part(z.as_ref()).as_ref())
        })
        .map_err(to_py)
    }

    /// Runs checks and returns the report as JSON text (without runtimes when `runtime` is false).
    #[pyo3(signature = (suite = vec!["all".to_string()], tol = DEFAULT_TOL, seed = DEFAULT_SEED, trials = DEFAULT_TRIALS, runtime = false))]
    fn verify(
        &self,
        py: Python<'_>,
        suite: Vec<String>,
        tol: f64,
        seed: u64,
        trials: usize,
        runtime: bool,
    ) -> PyResult<String> {
        let params = CheckParams { tol, seed, trials };
        py.detach(|| {
            params.validate()?;
            let results = verify::run_suite(&suite, &self.inner, params)?;
            Report::new(&self.preset, &self.inner, params, results).to_json(runtime)
        })
        .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Tower(preset={:?}, max_level={}, dims={:?})", self.preset.to_string(), self.inner.max_level(), self.inner.dims())
    }
}

#[pymodule]
fn oqlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(qdim, m)?)?;
    m.add_function(wrap_pyfunction!(qdim_exact, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(walk_weights, m)?)?;
    m.add_function(wrap_pyfunction!(check_names, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_walk, m)?)?;
    m.add_class::<Tower>()?;
    Ok(())
}
