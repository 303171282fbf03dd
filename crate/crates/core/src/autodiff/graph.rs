use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::spectral::kernels;

use super::tensor::{Dtype, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Sin(NodeId),
    Gelu(NodeId),
    Sum(NodeId),
    Select(NodeId, usize),
    Affine {
        x: NodeId,
        w: NodeId,
        b: Option<NodeId>,
    },
    Rdft {
        x: NodeId,
        n: usize,
        k_max: usize,
    },
    SpectralMix {
        spec: NodeId,
        weights: NodeId,
    },
    Irdft {
        spec: NodeId,
        n: usize,
    },
    RelativeL2 {
        pred: NodeId,
        target: Tensor,
        samples: usize,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

/// Arena of nodes in creation order. Parents always precede children, so
/// the arena order is a topological order of the graph.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Result of a reverse pass: one optional gradient per graph node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    /// Gradient of `id`, or zeros shaped like `like` when `id` is unreachable.
    pub fn get_or_zeros(&self, id: NodeId, like: &Tensor) -> Tensor {
        self.get(id).cloned().unwrap_or_else(|| like.zeros_like())
    }

    pub fn take(&mut self, id: NodeId) -> Option<Tensor> {
        self.grads.get_mut(id.0).and_then(|g| g.take())
    }
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x * FRAC_1_SQRT_2))
}

fn gelu_prime(x: f64) -> f64 {
    let cdf = 0.5 * (1.0 + libm::erf(x * FRAC_1_SQRT_2));
    let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    cdf + x * pdf
}

/// Leading (batch) extent, signal length and channel count of a `[.., n, c]` tensor.
fn signal_dims(shape: &[usize], op: &'static str) -> Result<(usize, usize, usize)> {
    if shape.len() < 2 {
        return Err(Error::invalid(format!(
            "{op}: expected a tensor of rank >= 2, got shape {shape:?}"
        )));
    }
    let r = shape.len();
    let batch = shape[..r - 2].iter().product();
    Ok((batch, shape[r - 2], shape[r - 1]))
}

fn with_axis(shape: &[usize], axis_from_end: usize, len: usize) -> Vec<usize> {
    let mut s = shape.to_vec();
    let r = s.len();
    s[r - axis_from_end] = len;
    s
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    /// Parameter or constant input. Every leaf receives a gradient.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn real(&self, id: NodeId, op: &'static str) -> Result<&[f64]> {
        self.value(id).as_real().map_err(|_| Error::Dtype {
            op,
            expected: "real",
        })
    }

    fn complex(&self, id: NodeId, op: &'static str) -> Result<&[num_complex::Complex64]> {
        self.value(id).as_complex().map_err(|_| Error::Dtype {
            op,
            expected: "complex",
        })
    }

    /// Output shape of a binary op: exact match, or one side holds a single value.
    fn broadcast_shape(&self, a: NodeId, b: NodeId, op: &'static str) -> Result<Vec<usize>> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() == tb.shape() || tb.is_scalar() {
            Ok(ta.shape().to_vec())
        } else if ta.is_scalar() {
            Ok(tb.shape().to_vec())
        } else {
            Err(Error::ShapeMismatch {
                op,
                left: ta.shape().to_vec(),
                right: tb.shape().to_vec(),
            })
        }
    }

    fn binary(
        &mut self,
        a: NodeId,
        b: NodeId,
        name: &'static str,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<NodeId> {
        let shape = self.broadcast_shape(a, b, name)?;
        let (xa, xb) = (self.real(a, name)?, self.real(b, name)?);
        let len = shape.iter().product::<usize>();
        let pick = |x: &[f64], i: usize| if x.len() == 1 { x[0] } else { x[i] };
        let out = (0..len).map(|i| f(pick(xa, i), pick(xb, i))).collect();
        let value = Tensor::real(&shape, out)?;
        Ok(self.push(value, op))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise product; either side may be a single value (scalar broadcast).
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    fn unary(&mut self, a: NodeId, name: &'static str, f: impl Fn(f64) -> f64, op: Op) -> Result<NodeId> {
        let x = self.real(a, name)?;
        let out = x.iter().map(|&v| f(v)).collect();
        let value = Tensor::real(self.value(a).shape(), out)?;
        Ok(self.push(value, op))
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> Result<NodeId> {
        self.unary(a, "scale", |v| v * factor, Op::Scale(a, factor))
    }

    pub fn sin(&mut self, a: NodeId) -> Result<NodeId> {
        self.unary(a, "sin", f64::sin, Op::Sin(a))
    }

    /// Exact (erf-based) GELU.
    pub fn gelu(&mut self, a: NodeId) -> Result<NodeId> {
        self.unary(a, "gelu", gelu, Op::Gelu(a))
    }

    pub fn sum(&mut self, a: NodeId) -> Result<NodeId> {
        let s = self.real(a, "sum")?.iter().sum();
        Ok(self.push(Tensor::scalar(s), Op::Sum(a)))
    }

    /// Single entry `index` of a real tensor, as a scalar node.
    pub fn select(&mut self, a: NodeId, index: usize) -> Result<NodeId> {
        let v = self.real(a, "select")?;
        let x = *v.get(index).ok_or_else(|| {
            Error::invalid(format!("select: index {index} out of range for {} values", v.len()))
        })?;
        Ok(self.push(Tensor::scalar(x), Op::Select(a, index)))
    }

    /// `y[r, :] = x[r, :] · w + b` over every leading index `r` of `x`.
    pub fn affine(&mut self, x: NodeId, w: NodeId, b: Option<NodeId>) -> Result<NodeId> {
        let (xs, ws) = (self.value(x).shape(), self.value(w).shape());
        if ws.len() != 2 || xs.is_empty() || xs[xs.len() - 1] != ws[0] {
            return Err(Error::ShapeMismatch {
                op: "affine",
                left: xs.to_vec(),
                right: ws.to_vec(),
            });
        }
        let (d_in, d_out) = (ws[0], ws[1]);
        let out_shape = with_axis(xs, 1, d_out);
        if let Some(b) = b {
            let bs = self.value(b).shape();
            if bs != [d_out] {
                return Err(Error::ShapeMismatch {
                    op: "affine bias",
                    left: vec![d_out],
                    right: bs.to_vec(),
                });
            }
        }
        let xv = self.real(x, "affine")?;
        let wv = self.real(w, "affine")?;
        let rows = xv.len() / d_in;
        let mut out = vec![0.0; rows * d_out];
        if let Some(b) = b {
            let bv = self.real(b, "affine")?;
            for row in out.chunks_exact_mut(d_out) {
                row.copy_from_slice(bv);
            }
        }
        kernels::gemm(rows, d_in, d_out, xv, false, wv, false, &mut out, 1.0);
        let value = Tensor::real(&out_shape, out)?;
        Ok(self.push(value, Op::Affine { x, w, b }))
    }

    /// Lowest `k_max` modes of the unnormalized DFT along the second-to-last axis.
    pub fn rdft(&mut self, x: NodeId, k_max: usize) -> Result<NodeId> {
        let shape = self.value(x).shape().to_vec();
        let (batch, n, ch) = signal_dims(&shape, "rdft")?;
        kernels::check_modes(n, k_max)?;
        let xv = self.real(x, "rdft")?;
        let out = kernels::rdft(xv, batch, n, ch, k_max);
        let value = Tensor::complex(&with_axis(&shape, 2, k_max), out)?;
        Ok(self.push(value, Op::Rdft { x, n, k_max }))
    }

    /// Per-mode channel mixing `out[k, l] = Σ_i w[k, l, i] · spec[k, i]`.
    pub fn spectral_mix(&mut self, spec: NodeId, weights: NodeId) -> Result<NodeId> {
        let shape = self.value(spec).shape().to_vec();
        let (batch, k_max, c_in) = signal_dims(&shape, "spectral_mix")?;
        let ws = self.value(weights).shape();
        if ws.len() != 3 || ws[0] != k_max || ws[2] != c_in {
            return Err(Error::ShapeMismatch {
                op: "spectral_mix",
                left: shape,
                right: ws.to_vec(),
            });
        }
        let c_out = ws[1];
        let sv = self.complex(spec, "spectral_mix")?;
        let wv = self.complex(weights, "spectral_mix")?;
        let out = kernels::mix(sv, wv, batch, k_max, c_in, c_out);
        let value = Tensor::complex(&with_axis(&shape, 1, c_out), out)?;
        Ok(self.push(value, Op::SpectralMix { spec, weights }))
    }

    /// Real signal of length `n` from its lowest modes; absent modes are zero.
    pub fn irdft(&mut self, spec: NodeId, n: usize) -> Result<NodeId> {
        let shape = self.value(spec).shape().to_vec();
        let (batch, k_max, ch) = signal_dims(&shape, "irdft")?;
        kernels::check_modes(n, k_max)?;
        let sv = self.complex(spec, "irdft")?;
        let out = kernels::irdft(sv, batch, k_max, ch, n);
        let value = Tensor::real(&with_axis(&shape, 2, n), out)?;
        Ok(self.push(value, Op::Irdft { spec, n }))
    }

    /// Mean over samples of `‖pred_b − target_b‖ / ‖target_b‖`, where a sample
    /// is one slice along the leading axis (the whole tensor for rank ≤ 2).
    pub fn relative_l2(&mut self, pred: NodeId, target: &Tensor) -> Result<NodeId> {
        let pv = self.real(pred, "relative_l2")?;
        let ps = self.value(pred).shape();
        if ps != target.shape() {
            return Err(Error::ShapeMismatch {
                op: "relative_l2",
                left: ps.to_vec(),
                right: target.shape().to_vec(),
            });
        }
        let samples = if ps.len() >= 3 { ps[0] } else { 1 };
        let tv = target.as_real()?;
        let per = pv.len() / samples.max(1);
        let mut total = 0.0;
        for s in 0..samples {
            let r = s * per..(s + 1) * per;
            total += crate::train::relative_l2_slice(&pv[r.clone()], &tv[r])
                .map_err(|_| Error::DegenerateTarget { sample: s })?;
        }
        let value = Tensor::scalar(total / samples as f64);
        Ok(self.push(
            value,
            Op::RelativeL2 {
                pred,
                target: target.clone(),
                samples,
            },
        ))
    }

    /// Reverse pass from a real scalar node.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.numel() != 1 || lv.dtype() != Dtype::Real {
            return Err(Error::NonScalarLoss(lv.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::full(lv.shape(), 1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            for (parent, contrib) in self.local_grads(node, &g)? {
                match &mut grads[parent.0] {
                    Some(acc) => acc.add_assign(&contrib)?,
                    slot @ None => *slot = Some(contrib),
                }
            }
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn local_grads(&self, node: &Node, g: &Tensor) -> Result<Vec<(NodeId, Tensor)>> {
        let gv = || g.as_real();
        Ok(match &node.op {
            Op::Leaf => Vec::new(),
            Op::Add(a, b) => vec![
                (*a, self.reduce_to(*a, gv()?.to_vec())?),
                (*b, self.reduce_to(*b, gv()?.to_vec())?),
            ],
            Op::Sub(a, b) => vec![
                (*a, self.reduce_to(*a, gv()?.to_vec())?),
                (*b, self.reduce_to(*b, gv()?.iter().map(|v| -v).collect())?),
            ],
            Op::Mul(a, b) => {
                let (xa, xb, gr) = (self.real(*a, "mul")?, self.real(*b, "mul")?, gv()?);
                let pick = |x: &[f64], i: usize| if x.len() == 1 { x[0] } else { x[i] };
                let ga = (0..gr.len()).map(|i| gr[i] * pick(xb, i)).collect();
                let gb = (0..gr.len()).map(|i| gr[i] * pick(xa, i)).collect();
                vec![(*a, self.reduce_to(*a, ga)?), (*b, self.reduce_to(*b, gb)?)]
            }
            Op::Scale(a, f) => {
                let out = gv()?.iter().map(|v| v * f).collect();
                vec![(*a, Tensor::real(self.value(*a).shape(), out)?)]
            }
            Op::Sin(a) => {
                let x = self.real(*a, "sin")?;
                let out = gv()?.iter().zip(x).map(|(g, x)| g * x.cos()).collect();
                vec![(*a, Tensor::real(self.value(*a).shape(), out)?)]
            }
            Op::Gelu(a) => {
                let x = self.real(*a, "gelu")?;
                let out = gv()?.iter().zip(x).map(|(g, &x)| g * gelu_prime(x)).collect();
                vec![(*a, Tensor::real(self.value(*a).shape(), out)?)]
            }
            Op::Sum(a) => {
                let s = g.item()?;
                vec![(*a, Tensor::full(self.value(*a).shape(), s))]
            }
            Op::Select(a, index) => {
                let mut out = Tensor::zeros(self.value(*a).shape());
                out.as_real_mut()?[*index] = g.item()?;
                vec![(*a, out)]
            }
            Op::Affine { x, w, b } => {
                let gr = gv()?;
                let (xv, wv) = (self.real(*x, "affine")?, self.real(*w, "affine")?);
                let ws = self.value(*w).shape();
                let (d_in, d_out) = (ws[0], ws[1]);
                let rows = xv.len() / d_in;
                let mut gx = vec![0.0; rows * d_in];
                kernels::gemm(rows, d_out, d_in, gr, false, wv, true, &mut gx, 1.0);
                let mut gw = vec![0.0; d_in * d_out];
                kernels::gemm(d_in, rows, d_out, xv, true, gr, false, &mut gw, 1.0);
                let mut out = vec![
                    (*x, Tensor::real(self.value(*x).shape(), gx)?),
                    (*w, Tensor::real(ws, gw)?),
                ];
                if let Some(b) = b {
                    let mut gb = vec![0.0; d_out];
                    for row in gr.chunks_exact(d_out) {
                        gb.iter_mut().zip(row).for_each(|(acc, v)| *acc += v);
                    }
                    out.push((*b, Tensor::real(&[d_out], gb)?));
                }
                out
            }
            Op::Rdft { x, n, k_max } => {
                let (batch, _, ch) = signal_dims(self.value(*x).shape(), "rdft")?;
                let gx = kernels::rdft_adjoint(g.as_complex()?, batch, *n, ch, *k_max);
                vec![(*x, Tensor::real(self.value(*x).shape(), gx)?)]
            }
            Op::SpectralMix { spec, weights } => {
                let ss = self.value(*spec).shape();
                let (batch, k_max, c_in) = signal_dims(ss, "spectral_mix")?;
                let c_out = self.value(*weights).shape()[1];
                let (gs, gw) = kernels::mix_adjoint(
                    g.as_complex()?,
                    self.complex(*spec, "spectral_mix")?,
                    self.complex(*weights, "spectral_mix")?,
                    batch,
                    k_max,
                    c_in,
                    c_out,
                );
                vec![
                    (*spec, Tensor::complex(ss, gs)?),
                    (*weights, Tensor::complex(self.value(*weights).shape(), gw)?),
                ]
            }
            Op::Irdft { spec, n } => {
                let ss = self.value(*spec).shape();
                let (batch, k_max, ch) = signal_dims(ss, "irdft")?;
                let gs = kernels::irdft_adjoint(gv()?, batch, k_max, ch, *n);
                vec![(*spec, Tensor::complex(ss, gs)?)]
            }
            Op::RelativeL2 {
                pred,
                target,
                samples,
            } => {
                let scale = g.item()? / *samples as f64;
                let pv = self.real(*pred, "relative_l2")?;
                let tv = target.as_real()?;
                let per = pv.len() / *samples;
                let mut out = vec![0.0; pv.len()];
                for s in 0..*samples {
                    let r = s * per..(s + 1) * per;
                    let (p, t) = (&pv[r.clone()], &tv[r.clone()]);
                    let diff_norm = p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    let t_norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if diff_norm == 0.0 {
                        continue;
                    }
                    let c = scale / (diff_norm * t_norm);
                    for (o, (a, b)) in out[r].iter_mut().zip(p.iter().zip(t)) {
                        *o = c * (a - b);
                    }
                }
                vec![(*pred, Tensor::real(self.value(*pred).shape(), out)?)]
            }
        })
    }

    /// Sums a full-shape gradient down to a broadcast (single-value) operand.
    fn reduce_to(&self, id: NodeId, grad: Vec<f64>) -> Result<Tensor> {
        let t = self.value(id);
        if t.numel() == grad.len() {
            Tensor::real(t.shape(), grad)
        } else {
            Tensor::real(t.shape(), vec![grad.iter().sum()])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], v: &[f64]) -> Tensor {
        Tensor::real(shape, v.to_vec()).unwrap()
    }

    #[test]
    fn sin_and_gelu_fix_origin() {
        let mut g = Graph::new();
        let z = g.leaf(Tensor::zeros(&[4]));
        let s = g.sin(z).unwrap();
        let e = g.gelu(z).unwrap();
        assert!(g.value(s).as_real().unwrap().iter().all(|&v| v == 0.0));
        assert!(g.value(e).as_real().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sin_gradient_matches_central_difference() {
        let x0 = 0.3;
        let mut g = Graph::new();
        let x = g.leaf(Tensor::scalar(x0));
        let y = g.sin(x).unwrap();
        let grad = g.backward(y).unwrap().get(x).unwrap().item().unwrap();
        let h = 1e-5;
        let fd = ((x0 + h).sin() - (x0 - h).sin()) / (2.0 * h);
        assert!(((grad - fd) / fd).abs() < 1e-8, "{grad} vs {fd}");
    }

    #[test]
    fn gelu_derivative_matches_difference() {
        for &x0 in &[-2.0, -0.4, 0.0, 0.7, 3.1] {
            let h = 1e-5;
            let fd = (gelu(x0 + h) - gelu(x0 - h)) / (2.0 * h);
            assert!((gelu_prime(x0) - fd).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_shapes_name_both() {
        let mut g = Graph::new();
        let a = g.leaf(Tensor::zeros(&[2, 3]));
        let b = g.leaf(Tensor::zeros(&[3, 2]));
        let msg = g.add(a, b).unwrap_err().to_string();
        assert!(msg.contains("[2, 3]") && msg.contains("[3, 2]"), "{msg}");
    }

    #[test]
    fn affine_identity_and_hand_case() {
        let mut g = Graph::new();
        let x = g.leaf(t(&[1, 2], &[1.0, 1.0]));
        let w = g.leaf(t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]));
        let b = g.leaf(t(&[2], &[3.0, 4.0]));
        let y = g.affine(x, w, Some(b)).unwrap();
        assert_eq!(g.value(y), &t(&[1, 2], &[4.0, 5.0]));
        let y0 = g.affine(x, w, None).unwrap();
        assert_eq!(g.value(y0), g.value(x));
    }

    #[test]
    fn affine_bias_gradient_counts_rows() {
        let n = 7;
        let mut g = Graph::new();
        let x = g.leaf(Tensor::full(&[n, 3], 0.5));
        let w = g.leaf(Tensor::full(&[3, 2], -1.0));
        let b = g.leaf(Tensor::zeros(&[2]));
        let y = g.affine(x, w, Some(b)).unwrap();
        let s = g.sum(y).unwrap();
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(b).unwrap().as_real().unwrap(), &[n as f64, n as f64]);
    }

    #[test]
    fn affine_rejects_inner_mismatch() {
        let mut g = Graph::new();
        let x = g.leaf(Tensor::zeros(&[4, 3]));
        let w = g.leaf(Tensor::zeros(&[2, 2]));
        assert!(g.affine(x, w, None).is_err());
    }

    #[test]
    fn constant_loss_gives_zero_gradients() {
        let mut g = Graph::new();
        let p = g.leaf(Tensor::full(&[3], 2.0));
        let c = g.leaf(Tensor::scalar(5.0));
        let grads = g.backward(c).unwrap();
        assert!(grads.get(p).is_none());
        let z = grads.get_or_zeros(p, g.value(p));
        assert!(z.as_real().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_sum_of_squares_has_identity_gradient() {
        let xs = [0.5, -1.25, 3.0];
        let mut g = Graph::new();
        let x = g.leaf(t(&[3], &xs));
        let sq = g.mul(x, x).unwrap();
        let s = g.sum(sq).unwrap();
        let l = g.scale(s, 0.5).unwrap();
        let grads = g.backward(l).unwrap();
        assert_eq!(grads.get(x).unwrap().as_real().unwrap(), &xs);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut g = Graph::new();
        let x = g.leaf(Tensor::zeros(&[2]));
        assert!(matches!(g.backward(x), Err(Error::NonScalarLoss(_))));
    }

    #[test]
    fn reused_leaf_accumulates_both_paths() {
        // y = 3x + x*x  =>  dy/dx = 3 + 2x
        let mut g = Graph::new();
        let x = g.leaf(Tensor::scalar(1.5));
        let a = g.scale(x, 3.0).unwrap();
        let b = g.mul(x, x).unwrap();
        let y = g.add(a, b).unwrap();
        let d = g.backward(y).unwrap().get(x).unwrap().item().unwrap();
        assert_eq!(d, 6.0);
    }

    #[test]
    fn scalar_broadcast_gradient_sums() {
        let mut g = Graph::new();
        let c = g.leaf(Tensor::scalar(2.0));
        let x = g.leaf(t(&[3], &[1.0, 2.0, 3.0]));
        let y = g.mul(c, x).unwrap();
        let s = g.sum(y).unwrap();
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(c).unwrap().item().unwrap(), 6.0);
        assert_eq!(grads.get(x).unwrap().as_real().unwrap(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn repeated_backward_is_deterministic() {
        let mut g = Graph::new();
        let x = g.leaf(t(&[4], &[0.1, -0.2, 0.3, 0.9]));
        let s = g.sin(x).unwrap();
        let e = g.gelu(s).unwrap();
        let l = g.sum(e).unwrap();
        let a = g.backward(l).unwrap();
        let b = g.backward(l).unwrap();
        assert_eq!(a.get(x), b.get(x));
    }
}
