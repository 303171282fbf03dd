//! Python bindings. Functions on a 1-D grid take and return plain lists;
//! batches are lists of per-sample lists.

use std::path::PathBuf;

use mscale_fno::autodiff::Tensor;
use mscale_fno::data::{self, Preset, SampleSet, SplitCounts};
use mscale_fno::io::{load_checkpoint, save_checkpoint};
use mscale_fno::{harness, train, Activation, Error, FnoParams, Model, MscaleParams, Operator};
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e.exit_code() {
        4 => PyArithmeticError::new_err(e.to_string()),
        _ if matches!(e, Error::Io { .. }) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for mscale_fno::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn parse_activation(name: &str) -> PyResult<Activation> {
    match name {
        "sine" | "sin" => Ok(Activation::Sine),
        "gelu" => Ok(Activation::Gelu),
        other => Err(PyValueError::new_err(format!(
            "unknown activation `{other}` (expected sine or gelu)"
        ))),
    }
}

#[pyclass(name = "FnoConfig", from_py_object)]
#[derive(Clone)]
struct PyFnoConfig {
    inner: mscale_fno::FnoConfig,
}

#[pymethods]
impl PyFnoConfig {
    #[new]
    #[pyo3(signature = (width, modes, layers, activation = "gelu", dim = 1, in_channels = 1, out_channels = 1))]
    fn new(
        width: usize,
        modes: usize,
        layers: usize,
        activation: &str,
        dim: usize,
        in_channels: usize,
        out_channels: usize,
    ) -> PyResult<Self> {
        let inner = mscale_fno::FnoConfig {
            dim,
            in_channels,
            out_channels,
            width,
            modes,
            layers,
            activation: parse_activation(activation)?,
        };
        inner.validate().py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes
    }

    #[getter]
    fn layers(&self) -> usize {
        self.inner.layers
    }

    #[getter]
    fn activation(&self) -> &'static str {
        match self.inner.activation {
            Activation::Sine => "sine",
            Activation::Gelu => "gelu",
        }
    }

    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    fn breakdown(&self) -> Vec<(&'static str, usize)> {
        self.inner.breakdown()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "FnoConfig(width={}, modes={}, layers={}, activation='{}', dim={}, in_channels={}, out_channels={})",
            c.width,
            c.modes,
            c.layers,
            self.activation(),
            c.dim,
            c.in_channels,
            c.out_channels
        )
    }
}

#[pyfunction]
fn mscale_count(config: &PyFnoConfig, branches: usize) -> usize {
    mscale_fno::mscale_count(&config.inner, branches)
}

/// Grid `[n, d]` from a flat list, inputs `[B, n, d_a]` from per-sample lists.
fn batch_tensors(model: &Model, grid: &[f64], inputs: &[Vec<f64>]) -> PyResult<(Tensor, Tensor)> {
    let cfg = model.config();
    if grid.is_empty() || !grid.len().is_multiple_of(cfg.dim) {
        return Err(PyValueError::new_err(format!(
            "grid length {} is not a multiple of dim = {}",
            grid.len(),
            cfg.dim
        )));
    }
    let n = grid.len() / cfg.dim;
    let per = n * cfg.in_channels;
    if let Some(bad) = inputs.iter().find(|s| s.len() != per) {
        return Err(PyValueError::new_err(format!(
            "each input sample needs {per} values, got {}",
            bad.len()
        )));
    }
    let grid = Tensor::real(&[n, cfg.dim], grid.to_vec()).py()?;
    let flat = inputs.concat();
    let inputs = Tensor::real(&[inputs.len(), n, cfg.in_channels], flat).py()?;
    Ok((grid, inputs))
}

fn split_samples(t: &Tensor) -> PyResult<Vec<Vec<f64>>> {
    let b = t.shape()[0];
    let v = t.as_real().py()?;
    Ok(v.chunks(v.len() / b.max(1)).map(<[f64]>::to_vec).collect())
}

/// A normal FNO or a multi-scale FNO.
#[pyclass(name = "Model", from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (config, seed = 0))]
    fn fno(config: &PyFnoConfig, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: Model::Fno(FnoParams::init(&config.inner, seed).py()?),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (config, scales, seed = 0))]
    fn mscale(config: &PyFnoConfig, scales: Vec<f64>, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: Model::Mscale(MscaleParams::init(&config.inner, &scales, seed).py()?),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: load_checkpoint(&path).py()?.0,
        })
    }

    #[pyo3(signature = (path, seed = 0))]
    fn save(&self, path: PathBuf, seed: u64) -> PyResult<String> {
        Ok(save_checkpoint(&path, &self.inner, seed).py()?.display().to_string())
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn config(&self) -> PyFnoConfig {
        PyFnoConfig {
            inner: self.inner.config().clone(),
        }
    }

    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    fn section_names(&self) -> Vec<String> {
        self.inner.sections().into_iter().map(|(n, _)| n).collect()
    }

    /// Branch scales (empty for a normal FNO).
    fn scales(&self) -> Vec<f64> {
        match &self.inner {
            Model::Mscale(m) => m.scales().to_vec(),
            Model::Fno(_) => Vec::new(),
        }
    }

    /// Branch weights (empty for a normal FNO).
    fn weights(&self) -> Vec<f64> {
        match &self.inner {
            Model::Mscale(m) => m.weights().to_vec(),
            Model::Fno(_) => Vec::new(),
        }
    }

    fn forward(&self, grid: Vec<f64>, inputs: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let (g, a) = batch_tensors(&self.inner, &grid, &inputs)?;
        split_samples(&self.inner.predict(&g, &a).py()?)
    }

    /// One list of per-sample outputs for each branch.
    fn branch_contributions(&self, grid: Vec<f64>, inputs: Vec<Vec<f64>>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let Model::Mscale(m) = &self.inner else {
            return Err(PyValueError::new_err("branch contributions need a multi-scale model"));
        };
        let (g, a) = batch_tensors(&self.inner, &grid, &inputs)?;
        m.branch_contributions(&g, &a).py()?.iter().map(split_samples).collect()
    }

    /// Trains in place; returns one dict-like tuple per epoch:
    /// `(epoch, train_loss, val_err, test_err)`.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (dataset, epochs, batch_size = 20, seed = 0, learning_rate = 1e-3, keep_best = false))]
    fn train(
        &mut self,
        py: Python<'_>,
        dataset: &PyDataset,
        epochs: usize,
        batch_size: usize,
        seed: u64,
        learning_rate: f64,
        keep_best: bool,
    ) -> PyResult<Vec<(usize, f64, f64, f64)>> {
        let mut cfg = train::TrainConfig::new(epochs, batch_size, seed);
        cfg.learning_rate = learning_rate;
        let model = self.inner.clone();
        let out = py.detach(|| train::train(model, &dataset.inner, &cfg)).py()?;
        self.inner = if keep_best { out.best_model } else { out.final_model };
        Ok(out
            .records
            .iter()
            .map(|r| (r.epoch, r.train_loss, r.val_err, r.test_err))
            .collect())
    }

    /// Per-sample relative errors on a named split.
    #[pyo3(signature = (dataset, split = "test"))]
    fn evaluate(&self, dataset: &PyDataset, split: &str) -> PyResult<Vec<f64>> {
        let idx = dataset.inner.splits().by_name(split).py()?;
        train::evaluate(&self.inner, &dataset.inner, idx, 50).py()
    }

    fn __repr__(&self) -> String {
        format!("Model(kind='{}', parameters={})", self.kind(), self.parameter_count())
    }
}

#[pyclass(name = "Dataset", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: SampleSet,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    #[pyo3(signature = (preset, seed = 0, counts = None))]
    fn generate(preset: &str, seed: u64, counts: Option<(usize, usize, usize)>) -> PyResult<Self> {
        let p: Preset = preset.parse().py()?;
        let counts = counts.map_or_else(|| p.default_counts(), |(train, val, test)| SplitCounts { train, val, test });
        Ok(Self {
            inner: data::build_dataset(p, seed, counts).py()?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: mscale_fno::io::load_dataset(&path).py()?,
        })
    }

    fn save(&self, dir: PathBuf) -> PyResult<String> {
        Ok(mscale_fno::io::save_dataset(&dir, &self.inner).py()?.display().to_string())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid().to_vec()
    }

    #[getter]
    fn preset(&self) -> String {
        self.inner.meta().preset.clone()
    }

    fn split(&self, name: &str) -> PyResult<Vec<usize>> {
        Ok(self.inner.splits().by_name(name).py()?.to_vec())
    }

    fn input(&self, index: usize) -> PyResult<Vec<f64>> {
        self.check(index)?;
        Ok(self.inner.input(index).to_vec())
    }

    fn target(&self, index: usize) -> PyResult<Vec<f64>> {
        self.check(index)?;
        Ok(self.inner.target(index).to_vec())
    }
}

impl PyDataset {
    fn check(&self, index: usize) -> PyResult<()> {
        if index < self.inner.len() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!(
                "sample {index} out of range ({})",
                self.inner.len()
            )))
        }
    }
}

#[pyfunction]
fn relative_l2(pred: Vec<f64>, target: Vec<f64>) -> PyResult<f64> {
    train::relative_l2(&pred, &target).py()
}

/// Solves `u'' + q u = f` on a uniform grid with spacing `h` and zero
/// boundary values; `q` and `f` hold the values at every grid point.
#[pyfunction]
fn solve_dirichlet(h: f64, q: Vec<f64>, f: Vec<f64>) -> PyResult<Vec<f64>> {
    data::solve_dirichlet(h, &q, &f).py()
}

/// Scattering solutions for one coefficient function sampled on the fine
/// grid of the problem with half-length `half_length`; returns
/// `(fine_grid, solutions)` with one solution per forcing frequency.
#[pyfunction]
fn helmholtz_solve(half_length: usize, omega: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let prob = data::HelmholtzProblem::scattering(half_length);
    let u = data::helmholtz_solve(&prob, &omega).py()?;
    Ok((prob.fine_grid(), u))
}

/// Random Fourier-series input on `grid`, scaled to unit sup norm.
#[pyfunction]
#[pyo3(signature = (grid, n_max, seed, use_sin = true, use_cos = false))]
fn gen_input_function(grid: Vec<f64>, n_max: usize, seed: u64, use_sin: bool, use_cos: bool) -> PyResult<Vec<f64>> {
    let spec = data::FourierSeriesSpec {
        n_max,
        use_sin,
        use_cos,
        seed,
    };
    data::gen_input_function(&spec, &grid).py()
}

#[pyfunction]
fn gen_ood_input(grid: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
    data::gen_ood_input(seed, &grid).py()
}

fn preset_names() -> Vec<&'static str> {
    Preset::NAMES.to_vec()
}

/// Parameter count and per-section breakdown of a config file's model.
#[pyfunction]
fn count_config(path: PathBuf) -> PyResult<(usize, Vec<(String, usize)>)> {
    let r = harness::cmd_count(&path).py()?;
    Ok((r.total, r.sections))
}

/// Runs a config file; returns the run directory.
#[pyfunction]
fn train_config(py: Python<'_>, path: PathBuf) -> PyResult<String> {
    let out = py.detach(|| harness::cmd_train(&path)).py()?;
    Ok(out.dir.display().to_string())
}

#[pymodule]
fn mscale_fno_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFnoConfig>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(mscale_count, m)?)?;
    m.add_function(wrap_pyfunction!(relative_l2, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dirichlet, m)?)?;
    m.add_function(wrap_pyfunction!(helmholtz_solve, m)?)?;
    m.add_function(wrap_pyfunction!(gen_input_function, m)?)?;
    m.add_function(wrap_pyfunction!(gen_ood_input, m)?)?;
    m.add_function(wrap_pyfunction!(count_config, m)?)?;
    m.add_function(wrap_pyfunction!(train_config, m)?)?;
    m.add("PRESETS", preset_names())?;
    Ok(())
}
