//! Single-branch Fourier neural operator.
//!
//! `v_0 = P(x, a)`, then for each Fourier layer
//! `v_t = σ(W v_{t-1} + b + M(F⁻¹(R_t · F(v_{t-1}))))` with `M` a two-layer GELU
//! MLP, and finally the two-layer GELU projection `Q(v_T)`.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Graph, NodeId, Tensor};
use crate::error::{Error, Result};
use crate::model::{check_batch_shapes, tile_grid, Operator};
use crate::rng::SeededRng;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sine,
    Gelu,
}

/// Architecture hyperparameters of one FNO.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnoConfig {
    /// Spatial dimension of the grid coordinates.
    #[serde(default = "one")]
    pub dim: usize,
    /// Channels of the input function.
    #[serde(default = "one")]
    pub in_channels: usize,
    /// Channels of the output function.
    #[serde(default = "one")]
    pub out_channels: usize,
    /// Lifted channel width `d_v`.
    pub width: usize,
    /// Retained Fourier modes `k_max`.
    pub modes: usize,
    /// Number of Fourier layers `T`.
    pub layers: usize,
    pub activation: Activation,
}

fn one() -> usize {
    1
}

impl FnoConfig {
    pub fn new(width: usize, modes: usize, layers: usize, activation: Activation) -> Self {
        Self {
            dim: 1,
            in_channels: 1,
            out_channels: 1,
            width,
            modes,
            layers,
            activation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("dim", self.dim),
            ("in_channels", self.in_channels),
            ("out_channels", self.out_channels),
            ("width", self.width),
            ("modes", self.modes),
            ("layers", self.layers),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::Config(format!("model.{name} must be >= 1")));
            }
        }
        Ok(())
    }

    /// Exact trainable parameter count, complex spectral weights counted once:
    /// `(d + d_a + 1)d_v + T[(k_max + 3)d_v² + 3d_v] + 2d_v² + (2d_u + 2)d_v + d_u`.
    pub fn parameter_count(&self) -> usize {
        self.breakdown().iter().map(|(_, c)| c).sum()
    }

    /// Parameter count split into lifting, Fourier layers and projection.
    pub fn breakdown(&self) -> Vec<(&'static str, usize)> {
        let (d, da, du) = (self.dim, self.in_channels, self.out_channels);
        let (w, k, t) = (self.width, self.modes, self.layers);
        vec![
            ("lifting", (d + da + 1) * w),
            ("fourier_layers", t * ((k + 3) * w * w + 3 * w)),
            ("projection", 2 * w * w + (2 * du + 2) * w + du),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lifting {
    /// `[d, d_v]`
    pub coord_weight: Tensor,
    /// `[d_a, d_v]`
    pub input_weight: Tensor,
    pub bias: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierLayer {
    pub local_weight: Tensor,
    pub local_bias: Tensor,
    /// Complex `[k_max, d_v (out), d_v (in)]`.
    pub spectral: Tensor,
    pub mlp_weight1: Tensor,
    pub mlp_bias1: Tensor,
    pub mlp_weight2: Tensor,
    pub mlp_bias2: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `[d_v, 2 d_v]`
    pub hidden_weight: Tensor,
    pub hidden_bias: Tensor,
    /// `[2 d_v, d_u]`
    pub out_weight: Tensor,
    pub out_bias: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FnoParams {
    pub config: FnoConfig,
    pub lift: Lifting,
    pub layers: Vec<FourierLayer>,
    pub proj: Projection,
}

struct Init<'a> {
    rng: &'a mut SeededRng,
}

impl Init<'_> {
    fn weight(&mut self, fan_in: usize, rows: usize, cols: usize) -> Tensor {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let data = (0..rows * cols).map(|_| self.rng.uniform(-bound, bound)).collect();
        Tensor::real(&[rows, cols], data).expect("sized buffer")
    }

    fn spectral(&mut self, k: usize, w: usize) -> Tensor {
        let s = 1.0 / w as f64;
        let data = (0..k * w * w)
            .map(|_| {
                let re = self.rng.uniform(-s, s);
                let im = self.rng.uniform(-s, s);
                Complex64::new(re, im)
            })
            .collect();
        Tensor::complex(&[k, w, w], data).expect("sized buffer")
    }
}

impl FnoParams {
    /// Uniform fan-in initialization; the lifting treats `(x, a)` as one
    /// input of width `d + d_a`. Spectral weights have real and imaginary
    /// parts uniform in `[-1/d_v, 1/d_v]`. Biases start at zero.
    pub fn init(config: &FnoConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = SeededRng::new(seed);
        let mut init = Init { rng: &mut rng };
        let (d, da, du) = (config.dim, config.in_channels, config.out_channels);
        let (w, k) = (config.width, config.modes);
        let lift = Lifting {
            coord_weight: init.weight(d + da, d, w),
            input_weight: init.weight(d + da, da, w),
            bias: Tensor::zeros(&[w]),
        };
        let layers = (0..config.layers)
            .map(|_| FourierLayer {
                local_weight: init.weight(w, w, w),
                local_bias: Tensor::zeros(&[w]),
                spectral: init.spectral(k, w),
                mlp_weight1: init.weight(w, w, w),
                mlp_bias1: Tensor::zeros(&[w]),
                mlp_weight2: init.weight(w, w, w),
                mlp_bias2: Tensor::zeros(&[w]),
            })
            .collect();
        let proj = Projection {
            hidden_weight: init.weight(w, w, 2 * w),
            hidden_bias: Tensor::zeros(&[2 * w]),
            out_weight: init.weight(2 * w, 2 * w, du),
            out_bias: Tensor::zeros(&[du]),
        };
        Ok(Self {
            config: config.clone(),
            lift,
            layers,
            proj,
        })
    }

    /// Same architecture with every parameter set to zero.
    pub fn zeros(config: &FnoConfig) -> Result<Self> {
        let mut p = Self::init(config, 0)?;
        for t in p.sections_mut() {
            *t = t.zeros_like();
        }
        Ok(p)
    }

    /// Forward pass on already-registered leaves (`leaves` in section order),
    /// with coordinates and input values given as `[batch, n, ·]` nodes.
    pub(crate) fn apply(
        &self,
        g: &mut Graph,
        leaves: &[NodeId],
        coords: NodeId,
        inputs: NodeId,
    ) -> Result<NodeId> {
        let n = g.value(coords).shape()[1];
        let mut p = leaves.iter().copied();
        let mut next = || p.next().expect("leaf per section");

        let (cw, iw, lb) = (next(), next(), next());
        let xc = g.affine(coords, cw, None)?;
        let xa = g.affine(inputs, iw, Some(lb))?;
        let mut v = g.add(xc, xa)?;

        for _ in 0..self.config.layers {
            let (lw, lb, r, w1, b1, w2, b2) = (next(), next(), next(), next(), next(), next(), next());
            let local = g.affine(v, lw, Some(lb))?;
            let spec = g.rdft(v, self.config.modes)?;
            let mixed = g.spectral_mix(spec, r)?;
            let z = g.irdft(mixed, n)?;
            let h = g.affine(z, w1, Some(b1))?;
            let h = g.gelu(h)?;
            let m = g.affine(h, w2, Some(b2))?;
            let s = g.add(local, m)?;
            v = match self.config.activation {
                Activation::Sine => g.sin(s)?,
                Activation::Gelu => g.gelu(s)?,
            };
        }

        let (hw, hb, ow, ob) = (next(), next(), next(), next());
        let h = g.affine(v, hw, Some(hb))?;
        let h = g.gelu(h)?;
        g.affine(h, ow, Some(ob))
    }

    pub(crate) fn register(&self, g: &mut Graph) -> Vec<NodeId> {
        self.sections().into_iter().map(|(_, t)| g.leaf(t.clone())).collect()
    }
}

impl Operator for FnoParams {
    fn sections(&self) -> Vec<(String, &Tensor)> {
        let mut out: Vec<(String, &Tensor)> = vec![
            ("lift.coord_weight".into(), &self.lift.coord_weight),
            ("lift.input_weight".into(), &self.lift.input_weight),
            ("lift.bias".into(), &self.lift.bias),
        ];
        for (t, l) in self.layers.iter().enumerate() {
            out.extend([
                (format!("layer{t}.local_weight"), &l.local_weight),
                (format!("layer{t}.local_bias"), &l.local_bias),
                (format!("layer{t}.spectral"), &l.spectral),
                (format!("layer{t}.mlp_weight1"), &l.mlp_weight1),
                (format!("layer{t}.mlp_bias1"), &l.mlp_bias1),
                (format!("layer{t}.mlp_weight2"), &l.mlp_weight2),
                (format!("layer{t}.mlp_bias2"), &l.mlp_bias2),
            ]);
        }
        out.extend([
            ("proj.hidden_weight".into(), &self.proj.hidden_weight),
            ("proj.hidden_bias".into(), &self.proj.hidden_bias),
            ("proj.out_weight".into(), &self.proj.out_weight),
            ("proj.out_bias".into(), &self.proj.out_bias),
        ]);
        out
    }

    fn sections_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![
            &mut self.lift.coord_weight,
            &mut self.lift.input_weight,
            &mut self.lift.bias,
        ];
        for l in &mut self.layers {
            out.extend([
                &mut l.local_weight,
                &mut l.local_bias,
                &mut l.spectral,
                &mut l.mlp_weight1,
                &mut l.mlp_bias1,
                &mut l.mlp_weight2,
                &mut l.mlp_bias2,
            ]);
        }
        out.extend([
            &mut self.proj.hidden_weight,
            &mut self.proj.hidden_bias,
            &mut self.proj.out_weight,
            &mut self.proj.out_bias,
        ]);
        out
    }

    fn build(&self, g: &mut Graph, grid: &Tensor, inputs: &Tensor) -> Result<(NodeId, Vec<NodeId>)> {
        let batch = check_batch_shapes(grid, inputs, self.config.dim, self.config.in_channels)?;
        let leaves = self.register(g);
        let coords = g.leaf(tile_grid(grid, batch)?);
        let a = g.leaf(inputs.clone());
        let out = self.apply(g, &leaves, coords, a)?;
        Ok((out, leaves))
    }
}
