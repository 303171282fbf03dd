use crate::autodiff::{Graph, NodeId, Tensor};
use crate::error::{Error, Result};

/// A trainable operator mapping `(grid, input function)` to an output function.
///
/// Parameters are exposed as named sections in a fixed order; that order is
/// the checkpoint layout and the order the optimizer walks.
pub trait Operator {
    fn sections(&self) -> Vec<(String, &Tensor)>;

    fn sections_mut(&mut self) -> Vec<&mut Tensor>;

    /// Registers every section as a graph leaf (in section order) and builds
    /// the forward pass for a batch.
    ///
    /// `grid` is `[n, d]`, `inputs` is `[batch, n, d_a]`; the output node is
    /// `[batch, n, d_u]`.
    fn build(&self, g: &mut Graph, grid: &Tensor, inputs: &Tensor) -> Result<(NodeId, Vec<NodeId>)>;

    /// Trainable parameter count with each complex entry counted once.
    fn parameter_count(&self) -> usize {
        self.sections().iter().map(|(_, t)| t.numel()).sum()
    }

    /// Forward pass without keeping the graph.
    fn predict(&self, grid: &Tensor, inputs: &Tensor) -> Result<Tensor> {
        let mut g = Graph::new();
        let (out, _) = self.build(&mut g, grid, inputs)?;
        Ok(g.value(out).clone())
    }
}

/// Repeats a `[n, d]` grid along a new leading batch axis.
pub(crate) fn tile_grid(grid: &Tensor, batch: usize) -> Result<Tensor> {
    let v = grid.as_real()?;
    let mut data = Vec::with_capacity(v.len() * batch);
    for _ in 0..batch {
        data.extend_from_slice(v);
    }
    let mut shape = vec![batch];
    shape.extend_from_slice(grid.shape());
    Tensor::real(&shape, data)
}

pub(crate) fn check_batch_shapes(
    grid: &Tensor,
    inputs: &Tensor,
    d: usize,
    d_a: usize,
) -> Result<usize> {
    let (gs, is) = (grid.shape(), inputs.shape());
    if gs.len() != 2 || gs[1] != d || is.len() != 3 || is[1] != gs[0] || is[2] != d_a {
        return Err(Error::ShapeMismatch {
            op: "operator input",
            left: gs.to_vec(),
            right: is.to_vec(),
        });
    }
    Ok(is[0])
}

use serde::{Deserialize, Serialize};

use crate::fno::FnoParams;
use crate::mscale::MscaleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    NormalFno,
    MscaleFno,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NormalFno => "normal-fno",
            Self::MscaleFno => "mscale-fno",
        })
    }
}

/// Either model family behind one type.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Fno(FnoParams),
    Mscale(MscaleParams),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Fno(_) => ModelKind::NormalFno,
            Self::Mscale(_) => ModelKind::MscaleFno,
        }
    }

    pub fn config(&self) -> &crate::fno::FnoConfig {
        match self {
            Self::Fno(p) => &p.config,
            Self::Mscale(p) => p.config(),
        }
    }

    pub fn branches(&self) -> usize {
        match self {
            Self::Fno(_) => 1,
            Self::Mscale(p) => p.len(),
        }
    }
}

impl Operator for Model {
    fn sections(&self) -> Vec<(String, &Tensor)> {
        match self {
            Self::Fno(p) => p.sections(),
            Self::Mscale(p) => p.sections(),
        }
    }

    fn sections_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Self::Fno(p) => p.sections_mut(),
            Self::Mscale(p) => p.sections_mut(),
        }
    }

    fn build(&self, g: &mut Graph, grid: &Tensor, inputs: &Tensor) -> Result<(NodeId, Vec<NodeId>)> {
        match self {
            Self::Fno(p) => p.build(g, grid, inputs),
            Self::Mscale(p) => p.build(g, grid, inputs),
        }
    }
}
