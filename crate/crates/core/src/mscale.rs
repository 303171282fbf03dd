//! Multi-scale FNO: `u(x) = Σ_i γ_i · FNO_i(c_i x, c_i a(x))` with
//! independent branch parameters and trainable scales `c` and weights `γ`.

use crate::autodiff::{Graph, NodeId, Tensor};
use crate::error::{Error, Result};
use crate::fno::{FnoConfig, FnoParams};
use crate::model::{check_batch_shapes, tile_grid, Operator};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct MscaleParams {
    pub branches: Vec<FnoParams>,
    /// Input scales `c`, shape `[N]`.
    pub scales: Tensor,
    /// Combination weights `γ`, shape `[N]`.
    pub weights: Tensor,
}

/// `N · count_parameters(config) + 2N`.
pub fn mscale_count(config: &FnoConfig, branches: usize) -> usize {
    branches * config.parameter_count() + 2 * branches
}

impl MscaleParams {
    /// Branch `i` is initialized from a seed derived from `(seed, i)`;
    /// weights start at `1/N`.
    pub fn init(config: &FnoConfig, initial_scales: &[f64], seed: u64) -> Result<Self> {
        let n = initial_scales.len();
        if n == 0 {
            return Err(Error::Config("mscale model needs at least one branch".into()));
        }
        let branches = (0..n)
            .map(|i| FnoParams::init(config, derive_seed(seed, i as u64 + 1)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            branches,
            scales: Tensor::real(&[n], initial_scales.to_vec())?,
            weights: Tensor::full(&[n], 1.0 / n as f64),
        })
    }

    /// Wraps explicit branches, scales and weights.
    pub fn from_parts(branches: Vec<FnoParams>, scales: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = branches.len();
        if n == 0 || scales.len() != n || weights.len() != n {
            return Err(Error::invalid(format!(
                "mscale: {n} branches, {} scales, {} weights",
                scales.len(),
                weights.len()
            )));
        }
        if branches.iter().any(|b| b.config != branches[0].config) {
            return Err(Error::invalid("mscale branches must share one config"));
        }
        Ok(Self {
            branches,
            scales: Tensor::real(&[n], scales)?,
            weights: Tensor::real(&[n], weights)?,
        })
    }

    pub fn config(&self) -> &FnoConfig {
        &self.branches[0].config
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn scales(&self) -> &[f64] {
        self.scales.as_real().expect("real scales")
    }

    pub fn weights(&self) -> &[f64] {
        self.weights.as_real().expect("real weights")
    }

    /// Registers leaves and returns one `γ_i · FNO_i(c_i x, c_i a)` node per branch.
    fn build_terms(
        &self,
        g: &mut Graph,
        grid: &Tensor,
        inputs: &Tensor,
    ) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
        let cfg = self.config();
        let batch = check_batch_shapes(grid, inputs, cfg.dim, cfg.in_channels)?;
        let per_branch = self.branches[0].sections().len();
        let mut leaves = Vec::with_capacity(per_branch * self.len() + 2);
        for b in &self.branches {
            leaves.extend(b.register(g));
        }
        let c = g.leaf(self.scales.clone());
        let gamma = g.leaf(self.weights.clone());
        leaves.push(c);
        leaves.push(gamma);

        let coords = g.leaf(tile_grid(grid, batch)?);
        let a = g.leaf(inputs.clone());
        let mut terms = Vec::with_capacity(self.len());
        for (i, branch) in self.branches.iter().enumerate() {
            let ci = g.select(c, i)?;
            let gi = g.select(gamma, i)?;
            let xs = g.mul(ci, coords)?;
            let as_ = g.mul(ci, a)?;
            let out = branch.apply(g, &leaves[i * per_branch..(i + 1) * per_branch], xs, as_)?;
            terms.push(g.mul(gi, out)?);
        }
        Ok((terms, leaves))
    }

    /// Per-branch contributions `γ_i · FNO_i(c_i x, c_i a)`, each `[batch, n, d_u]`.
    pub fn branch_contributions(&self, grid: &Tensor, inputs: &Tensor) -> Result<Vec<Tensor>> {
        let mut g = Graph::new();
        let (terms, _) = self.build_terms(&mut g, grid, inputs)?;
        Ok(terms.into_iter().map(|t| g.value(t).clone()).collect())
    }
}

impl Operator for MscaleParams {
    fn sections(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, b) in self.branches.iter().enumerate() {
            out.extend(b.sections().into_iter().map(|(name, t)| (format!("branch{i}.{name}"), t)));
        }
        out.push(("scales".into(), &self.scales));
        out.push(("weights".into(), &self.weights));
        out
    }

    fn sections_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for b in &mut self.branches {
            out.extend(b.sections_mut());
        }
        out.push(&mut self.scales);
        out.push(&mut self.weights);
        out
    }

    fn build(&self, g: &mut Graph, grid: &Tensor, inputs: &Tensor) -> Result<(NodeId, Vec<NodeId>)> {
        let (terms, leaves) = self.build_terms(g, grid, inputs)?;
        let mut acc = terms[0];
        for &t in &terms[1..] {
            acc = g.add(acc, t)?;
        }
        Ok((acc, leaves))
    }
}
