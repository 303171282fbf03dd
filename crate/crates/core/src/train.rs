//! Relative-L2 loss, Adam, and the epoch training loop.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Graph, Tensor};
use crate::data::SampleSet;
use crate::error::{Error, Result};
use crate::model::Operator;
use crate::rng::SeededRng;

/// `‖pred − target‖₂ / ‖target‖₂`.
pub fn relative_l2(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch {
            op: "relative_l2",
            left: vec![pred.len()],
            right: vec![target.len()],
        });
    }
    relative_l2_slice(pred, target)
}

pub(crate) fn relative_l2_slice(pred: &[f64], target: &[f64]) -> Result<f64> {
    let num: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    let den: f64 = target.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return Err(Error::DegenerateTarget { sample: 0 });
    }
    Ok(num.sqrt() / den.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    /// Samples per forward pass when computing validation/test errors.
    #[serde(default = "default_eval_batch")]
    pub eval_batch_size: usize,
    /// Record wall-clock seconds in the metrics; when false the column is
    /// written as zero so metrics files are reproducible bit for bit.
    #[serde(default = "default_true")]
    pub record_time: bool,
}

fn default_lr() -> f64 {
    1e-3
}
fn default_batch() -> usize {
    20
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_eval_batch() -> usize {
    50
}
fn default_true() -> bool {
    true
}

impl TrainConfig {
    pub fn new(epochs: usize, batch_size: usize, seed: u64) -> Self {
        Self {
            learning_rate: default_lr(),
            batch_size,
            epochs,
            seed,
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_eps(),
            eval_batch_size: default_eval_batch(),
            record_time: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.eval_batch_size == 0 {
            return Err(Error::Config("train.batch_size must be >= 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Config("train.learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// First and second moments for every real scalar of a model.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(model: &impl Operator) -> Self {
        let sizes: Vec<usize> = model.sections().iter().map(|(_, t)| t.real_len()).collect();
        Self {
            m: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: sizes.iter().map(|&s| vec![0.0; s]).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update. Complex entries are updated as two
/// independent reals. Fails without touching the model if any gradient is
/// not finite.
pub fn adam_step<M: Operator>(
    model: &mut M,
    grads: &[Tensor],
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    let names: Vec<String> = model.sections().into_iter().map(|(n, _)| n).collect();
    if grads.len() != names.len() || state.m.len() != names.len() {
        return Err(Error::invalid(format!(
            "adam: {} sections, {} gradients",
            names.len(),
            grads.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.all_finite()) {
        return Err(Error::NonFinite {
            section: names[i].clone(),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let mut flat_p = Vec::new();
    let mut flat_g = Vec::new();
    for (i, p) in model.sections_mut().into_iter().enumerate() {
        flat_p.clear();
        flat_g.clear();
        p.extend_flat(&mut flat_p);
        grads[i].extend_flat(&mut flat_g);
        if flat_g.len() != flat_p.len() {
            return Err(Error::ShapeMismatch {
                op: "adam",
                left: p.shape().to_vec(),
                right: grads[i].shape().to_vec(),
            });
        }
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for j in 0..flat_p.len() {
            let g = flat_g[j];
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            flat_p[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        p.assign_flat(&flat_p)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Sample-weighted mean of the batch losses seen during the epoch
    /// (each evaluated before that batch's update).
    pub train_loss: f64,
    pub val_err: f64,
    pub test_err: f64,
    pub seconds: f64,
}

impl EpochRecord {
    pub const CSV_HEADER: &'static str = "epoch,train_loss,val_err,test_err,seconds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:.3}",
            self.epoch, self.train_loss, self.val_err, self.test_err, self.seconds
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    pub final_model: M,
    /// Model with the lowest validation error seen (the initial model when
    /// no epoch ran).
    pub best_model: M,
    pub best_epoch: Option<usize>,
    pub records: Vec<EpochRecord>,
}

/// Per-sample relative errors over `indices`, evaluated in chunks.
pub fn evaluate<M: Operator>(
    model: &M,
    data: &SampleSet,
    indices: &[usize],
    chunk: usize,
) -> Result<Vec<f64>> {
    let grid = data.grid_tensor();
    let mut errs = Vec::with_capacity(indices.len());
    for idx in indices.chunks(chunk.max(1)) {
        let (inputs, targets) = data.batch(idx)?;
        let pred = model.predict(&grid, &inputs)?;
        let (pv, tv) = (pred.as_real()?, targets.as_real()?);
        let per = data.n();
        for (s, &sample) in idx.iter().enumerate() {
            let r = s * per..(s + 1) * per;
            errs.push(
                relative_l2_slice(&pv[r.clone()], &tv[r])
                    .map_err(|_| Error::DegenerateTarget { sample })?,
            );
        }
    }
    Ok(errs)
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn train<M: Operator + Clone>(model: M, data: &SampleSet, cfg: &TrainConfig) -> Result<TrainOutcome<M>> {
    train_with(model, data, cfg, |_| {})
}

/// Trains with one Adam step per batch; `on_epoch` sees each record as it
/// is produced.
pub fn train_with<M: Operator + Clone>(
    mut model: M,
    data: &SampleSet,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<M>> {
    cfg.validate()?;
    let splits = data.splits();
    if splits.train.is_empty() {
        return Err(Error::invalid("training split is empty"));
    }
    if cfg.epochs > 0 && splits.val.is_empty() {
        return Err(Error::invalid("validation split is empty"));
    }
    let grid = data.grid_tensor();
    let mut state = AdamState::new(&model);
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut best_model = model.clone();
    let mut best: Option<(usize, f64)> = None;
    let start = Instant::now();

    for epoch in 0..cfg.epochs {
        let mut order = splits.train.clone();
        SeededRng::derived(cfg.seed, epoch as u64).shuffle(&mut order);
        let mut loss_sum = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let (inputs, targets) = data.batch(idx)?;
            let mut g = Graph::new();
            let (out, leaves) = model.build(&mut g, &grid, &inputs)?;
            let loss = g.relative_l2(out, &targets)?;
            loss_sum += g.value(loss).item()? * idx.len() as f64;
            let grads = g.backward(loss)?;
            let grads: Vec<Tensor> = leaves
                .iter()
                .map(|&l| grads.get_or_zeros(l, g.value(l)))
                .collect();
            adam_step(&mut model, &grads, &mut state, cfg)?;
        }
        let val_err = mean(&evaluate(&model, data, &splits.val, cfg.eval_batch_size)?);
        let test_err = mean(&evaluate(&model, data, &splits.test, cfg.eval_batch_size)?);
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            val_err,
            test_err,
            seconds: if cfg.record_time {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            },
        };
        if best.is_none_or(|(_, b)| val_err < b) {
            best = Some((epoch, val_err));
            best_model = model.clone();
        }
        on_epoch(&record);
        records.push(record);
    }
    Ok(TrainOutcome {
        final_model: model,
        best_model,
        best_epoch: best.map(|(e, _)| e),
        records,
    })
}
