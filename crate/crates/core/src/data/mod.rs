//! Synthetic operator-learning datasets.

mod helmholtz;
mod pointwise;
mod presets;
mod series;

pub use helmholtz::{
    downsample, helmholtz_solve, solve_dirichlet, stencil_residual, uniform_grid, HelmholtzProblem,
};
pub use pointwise::PointwiseMap;
pub use presets::{build_dataset, Preset, SplitCounts};
pub use series::{gen_input_function, gen_ood_input, normalize_sup, FourierSeriesSpec, SeriesCoefficients};

use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    /// Contiguous blocks: train, then validation, then test.
    pub fn contiguous(counts: SplitCounts) -> Self {
        let SplitCounts { train, val, test } = counts;
        Self {
            train: (0..train).collect(),
            val: (train..train + val).collect(),
            test: (train + val..train + val + test).collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    /// Disjoint and exactly covering `0..samples`.
    pub fn is_partition_of(&self, samples: usize) -> bool {
        let mut seen = vec![false; samples];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= samples || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn by_name(&self, name: &str) -> Result<&[usize]> {
        match name {
            "train" => Ok(&self.train),
            "val" => Ok(&self.val),
            "test" => Ok(&self.test),
            other => Err(Error::invalid(format!(
                "unknown split `{other}` (expected train, val or test)"
            ))),
        }
    }
}

/// How a dataset was generated; stored alongside the arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub preset: String,
    pub seed: u64,
    pub half_length: f64,
    pub input_family: FourierSeriesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<PointwiseMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helmholtz: Option<HelmholtzProblem>,
    /// Split whose inputs come from the out-of-distribution generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ood_split: Option<String>,
}

/// Paired discretized functions `a(x_j) → u(x_j)` on one uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    grid: Vec<f64>,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    splits: Splits,
    meta: DatasetMeta,
}

impl SampleSet {
    /// `inputs` and `targets` are `samples × n`, row-major.
    pub fn new(
        grid: Vec<f64>,
        inputs: Vec<f64>,
        targets: Vec<f64>,
        splits: Splits,
        meta: DatasetMeta,
    ) -> Result<Self> {
        let n = grid.len();
        if n < 2 || !inputs.len().is_multiple_of(n) || inputs.len() != targets.len() {
            return Err(Error::Format(format!(
                "dataset arrays ({} inputs, {} targets) do not tile a grid of {n}",
                inputs.len(),
                targets.len()
            )));
        }
        let samples = inputs.len() / n;
        if !splits.is_partition_of(samples) {
            return Err(Error::Format(format!(
                "splits are not a partition of {samples} samples"
            )));
        }
        Ok(Self {
            grid,
            inputs,
            targets,
            splits,
            meta,
        })
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.n()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_tensor(&self) -> Tensor {
        Tensor::real(&[self.n(), 1], self.grid.clone()).expect("grid buffer")
    }

    pub fn splits(&self) -> &Splits {
        &self.splits
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.n()..(i + 1) * self.n()]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.n()..(i + 1) * self.n()]
    }

    pub fn inputs_flat(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets_flat(&self) -> &[f64] {
        &self.targets
    }

    /// `([B, n, 1] inputs, [B, n, 1] targets)` for the given sample indices.
    pub fn batch(&self, indices: &[usize]) -> Result<(Tensor, Tensor)> {
        let n = self.n();
        let mut a = Vec::with_capacity(indices.len() * n);
        let mut u = Vec::with_capacity(indices.len() * n);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Data(format!("sample {i} out of range ({})", self.len())));
            }
            a.extend_from_slice(self.input(i));
            u.extend_from_slice(self.target(i));
        }
        let shape = [indices.len(), n, 1];
        Ok((Tensor::real(&shape, a)?, Tensor::real(&shape, u)?))
    }
}
