//! Experiment runs driven by a TOML config: dataset generation, training
//! with persisted artifacts, evaluation, spectra and parameter counts.
//!
//! Relative paths inside a config file resolve against the file's directory.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autodiff::Tensor;
use crate::data::{build_dataset, Preset, SampleSet, SplitCounts};
use crate::error::{Error, Result};
use crate::fno::{Activation, FnoConfig, FnoParams};
use crate::io::{load_checkpoint, load_dataset, save_checkpoint, save_dataset};
use crate::model::{Model, ModelKind, Operator};
use crate::mscale::MscaleParams;
use crate::spectral::{max_modes, Spectrum};
use crate::train::{evaluate, mean, train_with, EpochRecord, TrainConfig};

fn one() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub dim: usize,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub in_channels: usize,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub out_channels: usize,
    pub width: usize,
    pub modes: usize,
    pub layers: usize,
    /// Defaults to `gelu` for a normal FNO and `sine` for the multi-scale one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<Activation>,
    /// Seed of the parameter initialization.
    #[serde(default)]
    pub seed: u64,
    /// Initial branch scales; their number is the branch count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
}

impl ModelSection {
    pub fn activation(&self) -> Activation {
        self.activation.unwrap_or(match self.kind {
            ModelKind::NormalFno => Activation::Gelu,
            ModelKind::MscaleFno => Activation::Sine,
        })
    }

    pub fn fno_config(&self) -> FnoConfig {
        FnoConfig {
            dim: self.dim,
            in_channels: self.in_channels,
            out_channels: self.out_channels,
            width: self.width,
            modes: self.modes,
            layers: self.layers,
            activation: self.activation(),
        }
    }

    pub fn branches(&self) -> usize {
        self.scales.as_ref().map_or(1, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        self.fno_config().validate()?;
        match (self.kind, &self.scales) {
            (ModelKind::NormalFno, Some(_)) => Err(Error::Config(
                "model.scales is only valid for kind = \"mscale-fno\"".into(),
            )),
            (ModelKind::MscaleFno, None) => Err(Error::Config(
                "model.scales is required for kind = \"mscale-fno\"".into(),
            )),
            (ModelKind::MscaleFno, Some(s)) if s.is_empty() => {
                Err(Error::Config("model.scales must list at least one scale".into()))
            }
            (ModelKind::MscaleFno, Some(s)) if s.iter().any(|c| !c.is_finite()) => {
                Err(Error::Config("model.scales must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self.kind {
            ModelKind::NormalFno => self.fno_config().parameter_count(),
            ModelKind::MscaleFno => crate::mscale::mscale_count(&self.fno_config(), self.branches()),
        }
    }

    pub fn init(&self) -> Result<Model> {
        self.validate()?;
        let cfg = self.fno_config();
        Ok(match (&self.kind, &self.scales) {
            (ModelKind::MscaleFno, Some(scales)) => {
                Model::Mscale(MscaleParams::init(&cfg, scales, self.seed)?)
            }
            _ => Model::Fno(FnoParams::init(&cfg, self.seed)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Generate this preset in memory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Or load a dataset written by `gen`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Split sizes for a generated preset (all three or none).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<usize>,
}

impl DataSection {
    fn counts(&self, preset: Preset) -> Result<SplitCounts> {
        match (self.train, self.val, self.test) {
            (None, None, None) => Ok(preset.default_counts()),
            (Some(train), Some(val), Some(test)) => Ok(SplitCounts { train, val, test }),
            _ => Err(Error::Config(
                "data.train, data.val and data.test must be given together".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.preset, &self.path) {
            (Some(p), None) => self.counts(p.parse()?).map(|_| ()),
            (None, Some(_)) if self.train.is_none() && self.val.is_none() && self.test.is_none() => {
                Ok(())
            }
            (None, Some(_)) => Err(Error::Config(
                "split sizes apply to generated presets, not to data.path".into(),
            )),
            _ => Err(Error::Config("exactly one of data.preset and data.path is required".into())),
        }
    }

    /// Builds or loads the dataset; `base` resolves a relative `path`.
    pub fn load(&self, base: &Path) -> Result<SampleSet> {
        self.validate()?;
        match (&self.preset, &self.path) {
            (Some(p), _) => {
                let preset: Preset = p.parse()?;
                build_dataset(preset, self.seed, self.counts(preset)?)
            }
            (_, Some(path)) => load_dataset(&base.join(path)),
            _ => unreachable!("validated above"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub train: TrainConfig,
    pub data: DataSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// Parses TOML text; syntax and schema errors report line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        self.data.validate()
    }
}

/// Reads a config file; returns the parsed config, its exact text and the
/// directory relative paths resolve against.
pub fn read_config(path: &Path) -> Result<(ExperimentConfig, String, PathBuf)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = ExperimentConfig::parse(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, text, base))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_compatible(model: &FnoConfig, data: &SampleSet) -> Result<()> {
    if model.dim != 1 || model.in_channels != 1 || model.out_channels != 1 {
        return Err(Error::Data(format!(
            "datasets hold scalar functions on a 1-D grid; model has dim = {}, in_channels = {}, out_channels = {}",
            model.dim, model.in_channels, model.out_channels
        )));
    }
    if model.modes > max_modes(data.n()) {
        return Err(Error::Data(format!(
            "model keeps {} modes but a {}-point grid has only {}",
            model.modes,
            data.n(),
            max_modes(data.n())
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSummary {
    pub preset: String,
    pub seed: u64,
    pub samples: usize,
    pub grid_points: usize,
    pub splits: SplitCounts,
    pub manifest: PathBuf,
}

/// Generates a preset dataset into directory `out`.
pub fn cmd_gen(preset: &str, seed: u64, counts: Option<SplitCounts>, out: &Path) -> Result<GenSummary> {
    let p: Preset = preset.parse()?;
    let counts = counts.unwrap_or_else(|| p.default_counts());
    let data = build_dataset(p, seed, counts)?;
    let manifest = save_dataset(out, &data)?;
    Ok(GenSummary {
        preset: p.to_string(),
        seed,
        samples: data.len(),
        grid_points: data.n(),
        splits: counts,
        manifest,
    })
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub model_kind: ModelKind,
    pub parameter_count: usize,
    pub model_seed: u64,
    pub train_seed: u64,
    pub data_seed: u64,
    pub data_preset: String,
    pub samples: usize,
    pub grid_points: usize,
    pub epochs: usize,
    pub best_epoch: Option<usize>,
    pub best_val_err: Option<f64>,
    /// Mean relative error of the final model on the training split.
    pub final_train_err: f64,
    pub final_test_err: Option<f64>,
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const RUN_MANIFEST: &str = "run.json";
pub const CONFIG_COPY: &str = "config.toml";
pub const BEST_CHECKPOINT: &str = "best";
pub const FINAL_CHECKPOINT: &str = "final";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub records: Vec<EpochRecord>,
}

/// Runs a config file: trains and writes the config copy, metrics CSV,
/// best and final checkpoints and `run.json` into the output directory.
pub fn cmd_train(config_path: &Path) -> Result<RunOutput> {
    cmd_train_with(config_path, |_| {})
}

pub fn cmd_train_with(config_path: &Path, mut on_epoch: impl FnMut(&EpochRecord)) -> Result<RunOutput> {
    let (cfg, text, base) = read_config(config_path)?;
    let data = cfg.data.load(&base)?;
    check_compatible(&cfg.model.fno_config(), &data)?;
    let model = cfg.model.init()?;

    let dir = base.join(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_text(&dir.join(CONFIG_COPY), &text)?;

    let metrics_path = dir.join(METRICS_FILE);
    let file = fs::File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
    let mut metrics = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(&metrics_path, e);
    writeln!(metrics, "{}", EpochRecord::CSV_HEADER).map_err(io_err)?;
    let mut write_err = None;
    let outcome = train_with(model, &data, &cfg.train, |r| {
        if write_err.is_none() {
            write_err = writeln!(metrics, "{}", r.csv_row()).and_then(|_| metrics.flush()).err();
        }
        on_epoch(r);
    })?;
    if let Some(e) = write_err {
        return Err(io_err(e));
    }
    metrics.flush().map_err(io_err)?;

    save_checkpoint(&dir.join(BEST_CHECKPOINT), &outcome.best_model, cfg.model.seed)?;
    save_checkpoint(&dir.join(FINAL_CHECKPOINT), &outcome.final_model, cfg.model.seed)?;
    let splits = data.splits();
    let final_train_err = mean(&evaluate(
        &outcome.final_model,
        &data,
        &splits.train,
        cfg.train.eval_batch_size,
    )?);
    let best_val_err = outcome.best_epoch.map(|e| outcome.records[e].val_err);
    let manifest = RunManifest {
        config_sha256: sha256_hex(text.as_bytes()),
        model_kind: cfg.model.kind,
        parameter_count: outcome.final_model.parameter_count(),
        model_seed: cfg.model.seed,
        train_seed: cfg.train.seed,
        data_seed: data.meta().seed,
        data_preset: data.meta().preset.clone(),
        samples: data.len(),
        grid_points: data.n(),
        epochs: cfg.train.epochs,
        best_epoch: outcome.best_epoch,
        best_val_err,
        final_train_err,
        final_test_err: outcome.records.last().map(|r| r.test_err),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_text(&dir.join(RUN_MANIFEST), &json)?;
    Ok(RunOutput {
        dir,
        manifest,
        records: outcome.records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub split: String,
    pub samples: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    #[serde(skip)]
    pub per_sample: Vec<(usize, f64)>,
}

impl EvalSummary {
    pub const CSV_HEADER: &'static str = "sample,rel_err";

    pub fn per_sample_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (i, e) in &self.per_sample {
            let _ = writeln!(out, "{i},{e:e}");
        }
        out
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Relative-error summary of a checkpoint over one split of a dataset.
/// `chunk` is the evaluation batch size (training uses the same setting, so
/// results match the metrics log exactly).
pub fn cmd_eval(checkpoint: &Path, dataset: &Path, split: &str, chunk: usize) -> Result<EvalSummary> {
    let (model, _) = load_checkpoint(checkpoint)?;
    let data = load_dataset(dataset)?;
    eval_model(&model, &data, split, chunk)
}

pub fn eval_model(model: &Model, data: &SampleSet, split: &str, chunk: usize) -> Result<EvalSummary> {
    check_compatible(model.config(), data)?;
    let indices = data.splits().by_name(split)?;
    if indices.is_empty() {
        return Err(Error::Data(format!("split `{split}` is empty")));
    }
    let errs = evaluate(model, data, indices, chunk)?;
    Ok(EvalSummary {
        split: split.to_string(),
        samples: errs.len(),
        mean: mean(&errs),
        median: median(&errs),
        max: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        per_sample: indices.iter().copied().zip(errs).collect(),
    })
}

/// Discrete spectra of one sample's target, prediction and (optionally)
/// per-branch contributions, modes `0..=n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub sample: usize,
    pub target: Vec<Complex64>,
    pub prediction: Vec<Complex64>,
    pub branches: Vec<Vec<Complex64>>,
}

impl SpectrumReport {
    pub fn modes(&self) -> usize {
        self.target.len()
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("mode,target,prediction");
        for i in 0..self.branches.len() {
            let _ = write!(h, ",branch{i}");
        }
        h
    }

    /// Magnitudes per mode, one row per mode.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for k in 0..self.modes() {
            let _ = write!(out, "{k},{:e},{:e}", self.target[k].norm(), self.prediction[k].norm());
            for b in &self.branches {
                let _ = write!(out, ",{:e}", b[k].norm());
            }
            out.push('\n');
        }
        out
    }

    /// Largest `|Σ_i branch_i[k] - prediction[k]|` over modes, or 0 without branches.
    pub fn branch_sum_deviation(&self) -> f64 {
        if self.branches.is_empty() {
            return 0.0;
        }
        (0..self.modes())
            .map(|k| {
                let sum: Complex64 = self.branches.iter().map(|b| b[k]).sum();
                (sum - self.prediction[k]).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn full_spectrum(values: &[f64]) -> Result<Vec<Complex64>> {
    let s = Spectrum::full(&Tensor::real(&[values.len()], values.to_vec())?)?;
    Ok((0..s.k_max()).map(|k| s.mode(k, 0)).collect())
}

pub fn spectrum_report(
    model: &Model,
    data: &SampleSet,
    sample: usize,
    with_branches: bool,
) -> Result<SpectrumReport> {
    check_compatible(model.config(), data)?;
    let (inputs, targets) = data.batch(&[sample])?;
    let grid = data.grid_tensor();
    let pred = model.predict(&grid, &inputs)?;
    let branches = match (with_branches, model) {
        (false, _) => Vec::new(),
        (true, Model::Fno(_)) => {
            return Err(Error::Config(
                "per-branch spectra need a multi-scale checkpoint".into(),
            ))
        }
        (true, Model::Mscale(m)) => m
            .branch_contributions(&grid, &inputs)?
            .iter()
            .map(|t| full_spectrum(t.as_real()?))
            .collect::<Result<_>>()?,
    };
    Ok(SpectrumReport {
        sample,
        target: full_spectrum(targets.as_real()?)?,
        prediction: full_spectrum(pred.as_real()?)?,
        branches,
    })
}

pub fn cmd_spectrum(checkpoint: &Path, dataset: &Path, sample: usize, with_branches: bool) -> Result<SpectrumReport> {
    let (model, _) = load_checkpoint(checkpoint)?;
    let data = load_dataset(dataset)?;
    spectrum_report(&model, &data, sample, with_branches)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub kind: ModelKind,
    pub total: usize,
    pub sections: Vec<(String, usize)>,
}

pub fn count_report(model: &ModelSection) -> Result<CountReport> {
    model.validate()?;
    let n = model.branches();
    let mut sections: Vec<(String, usize)> = model
        .fno_config()
        .breakdown()
        .into_iter()
        .map(|(name, c)| (name.to_string(), c * n))
        .collect();
    if model.kind == ModelKind::MscaleFno {
        sections.push(("scales".into(), n));
        sections.push(("weights".into(), n));
    }
    Ok(CountReport {
        kind: model.kind,
        total: model.parameter_count(),
        sections,
    })
}

pub fn cmd_count(config_path: &Path) -> Result<CountReport> {
    let (cfg, _, _) = read_config(config_path)?;
    count_report(&cfg.model)
}
