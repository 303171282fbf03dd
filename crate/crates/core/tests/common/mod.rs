//! Independent straight-loop implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use mscale_fno::autodiff::Tensor;
use mscale_fno::{Activation, FnoConfig, FnoParams, MscaleParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// `X[k] = Σ_j x[j] e^{-2πi kj/n}` for every `k` in `0..n`, O(n²).
pub fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| Complex64::from_polar(v, -2.0 * PI * ((k * j) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Real signal of length `n` from modes `0..k_max` of a Hermitian spectrum.
pub fn naive_inverse(modes: &[Complex64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (k, z) in modes.iter().enumerate() {
                let e = Complex64::from_polar(1.0, 2.0 * PI * ((k * j) % n) as f64 / n as f64);
                if k == 0 || 2 * k == n {
                    acc += z.re * e.re;
                } else {
                    acc += 2.0 * (z * e).re;
                }
            }
            acc / n as f64
        })
        .collect()
}

pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x / 2f64.sqrt()))
}

/// `rows × d_in` times `d_in × d_out` plus optional bias, written out.
fn dense(x: &[Vec<f64>], w: &Tensor, b: Option<&Tensor>) -> Vec<Vec<f64>> {
    let (d_in, d_out) = (w.shape()[0], w.shape()[1]);
    let wv = w.as_real().unwrap();
    x.iter()
        .map(|row| {
            assert_eq!(row.len(), d_in);
            (0..d_out)
                .map(|o| {
                    let mut s = b.map_or(0.0, |b| b.as_real().unwrap()[o]);
                    for i in 0..d_in {
                        s += row[i] * wv[i * d_out + o];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn map(x: Vec<Vec<f64>>, f: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    x.into_iter().map(|r| r.into_iter().map(&f).collect()).collect()
}

fn rows(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(<[f64]>::to_vec).collect()
}

/// Single-sample forward pass. `grid` is `n × d`, `input` is `n × d_a`;
/// returns `n × d_u`, row-major.
pub fn reference_fno(p: &FnoParams, grid: &[f64], input: &[f64]) -> Vec<f64> {
    let c = &p.config;
    let n = grid.len() / c.dim;
    let xs = rows(grid, c.dim);
    let a = rows(input, c.in_channels);
    let from_x = dense(&xs, &p.lift.coord_weight, None);
    let from_a = dense(&a, &p.lift.input_weight, Some(&p.lift.bias));
    let mut v: Vec<Vec<f64>> = from_x
        .iter()
        .zip(&from_a)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect();

    for layer in &p.layers {
        let w = c.width;
        let r = layer.spectral.as_complex().unwrap();
        // Per-channel spectra, truncated.
        let spectra: Vec<Vec<Complex64>> = (0..w)
            .map(|ch| {
                let sig: Vec<f64> = v.iter().map(|row| row[ch]).collect();
                naive_dft(&sig)[..c.modes].to_vec()
            })
            .collect();
        let mut z = vec![vec![0.0; w]; n];
        for o in 0..w {
            let mixed: Vec<Complex64> = (0..c.modes)
                .map(|k| (0..w).map(|i| r[(k * w + o) * w + i] * spectra[i][k]).sum())
                .collect();
            for (j, val) in naive_inverse(&mixed, n).into_iter().enumerate() {
                z[j][o] = val;
            }
        }
        let h = map(dense(&z, &layer.mlp_weight1, Some(&layer.mlp_bias1)), gelu);
        let m = dense(&h, &layer.mlp_weight2, Some(&layer.mlp_bias2));
        let local = dense(&v, &layer.local_weight, Some(&layer.local_bias));
        let act = |s: f64| match c.activation {
            Activation::Sine => s.sin(),
            Activation::Gelu => gelu(s),
        };
        v = local
            .iter()
            .zip(&m)
            .map(|(l, m)| l.iter().zip(m).map(|(a, b)| act(a + b)).collect())
            .collect();
    }
    let h = map(dense(&v, &p.proj.hidden_weight, Some(&p.proj.hidden_bias)), gelu);
    dense(&h, &p.proj.out_weight, Some(&p.proj.out_bias)).concat()
}

/// `Σ_i γ_i · FNO_i(c_i x, c_i a)`.
pub fn reference_mscale(p: &MscaleParams, grid: &[f64], input: &[f64]) -> Vec<f64> {
    let mut out: Option<Vec<f64>> = None;
    for ((branch, &c), &gamma) in p.branches.iter().zip(p.scales()).zip(p.weights()) {
        let gx: Vec<f64> = grid.iter().map(|x| c * x).collect();
        let ga: Vec<f64> = input.iter().map(|a| c * a).collect();
        let term = reference_fno(branch, &gx, &ga);
        out = Some(match out {
            None => term.iter().map(|t| gamma * t).collect(),
            Some(acc) => acc.iter().zip(&term).map(|(s, t)| s + gamma * t).collect(),
        });
    }
    out.expect("at least one branch")
}

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Small random architecture with `k_max` valid for a grid of `n` points.
pub fn random_config(r: &mut SplitMix64, n: usize) -> FnoConfig {
    FnoConfig {
        dim: r.random_range(1..=2),
        in_channels: r.random_range(1..=2),
        out_channels: r.random_range(1..=2),
        width: r.random_range(1..=4),
        modes: r.random_range(1..=n / 2 + 1),
        layers: r.random_range(1..=2),
        activation: if r.random_bool(0.5) {
            Activation::Sine
        } else {
            Activation::Gelu
        },
    }
}

pub fn random_vec(r: &mut SplitMix64, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| r.random_range(-scale..scale)).collect()
}

/// Overwrites every parameter (including biases) with random values so the
/// oracle comparison exercises all of them.
pub fn randomize<M: mscale_fno::Operator>(model: &mut M, seed: u64) {
    let mut r = rng(seed);
    for t in model.sections_mut() {
        let len = t.real_len();
        let vals = random_vec(&mut r, len, 0.5);
        t.assign_flat(&vals).unwrap();
    }
}

/// Single-sample tensors for the batched API.
pub fn as_batch(grid: &[f64], input: &[f64], cfg: &FnoConfig) -> (Tensor, Tensor) {
    let n = grid.len() / cfg.dim;
    (
        Tensor::real(&[n, cfg.dim], grid.to_vec()).unwrap(),
        Tensor::real(&[1, n, cfg.in_channels], input.to_vec()).unwrap(),
    )
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Outcome of comparing reverse-mode gradients with central differences.
#[derive(Debug)]
pub struct GradCheck {
    pub checked: usize,
    /// Largest `|g - fd| / max(rel · |fd|, abs)`; at most 1 means pass.
    pub worst: f64,
    pub worst_at: String,
}

pub const GRAD_REL_TOL: f64 = 1e-4;
pub const GRAD_ABS_FLOOR: f64 = 1e-6;

fn loss_of<M: mscale_fno::Operator>(model: &M, grid: &Tensor, inputs: &Tensor, targets: &Tensor) -> f64 {
    let pred = model.predict(grid, inputs).unwrap();
    let (p, t) = (pred.as_real().unwrap(), targets.as_real().unwrap());
    let n = p.len() / targets.shape()[0];
    let errs: Vec<f64> = p
        .chunks(n)
        .zip(t.chunks(n))
        .map(|(p, t)| mscale_fno::train::relative_l2(p, t).unwrap())
        .collect();
    errs.iter().sum::<f64>() / errs.len() as f64
}

/// Checks every scalar of every parameter section (complex entries as
/// real and imaginary parts) of the relative-L2 loss.
pub fn fd_check<M: mscale_fno::Operator + Clone>(
    model: &M,
    grid: &Tensor,
    inputs: &Tensor,
    targets: &Tensor,
    step: f64,
) -> GradCheck {
    let mut g = mscale_fno::autodiff::Graph::new();
    let (out, leaves) = model.build(&mut g, grid, inputs).unwrap();
    let loss = g.relative_l2(out, targets).unwrap();
    let grads = g.backward(loss).unwrap();
    // Graph loss and the slice-level loss must agree before comparing slopes.
    let direct = loss_of(model, grid, inputs, targets);
    assert!((g.value(loss).item().unwrap() - direct).abs() < 1e-13);

    let names: Vec<String> = model.sections().into_iter().map(|(n, _)| n).collect();
    let mut report = GradCheck {
        checked: 0,
        worst: 0.0,
        worst_at: String::new(),
    };
    for (s, (&leaf, name)) in leaves.iter().zip(&names).enumerate() {
        let mut analytic = Vec::new();
        grads.get_or_zeros(leaf, g.value(leaf)).extend_flat(&mut analytic);
        let mut base = Vec::new();
        model.sections()[s].1.extend_flat(&mut base);
        for (e, &ga) in analytic.iter().enumerate() {
            let eval = |delta: f64| {
                let mut m = model.clone();
                let mut vals = base.clone();
                vals[e] += delta;
                m.sections_mut()[s].assign_flat(&vals).unwrap();
                loss_of(&m, grid, inputs, targets)
            };
            let fd = (eval(step) - eval(-step)) / (2.0 * step);
            let ratio = (ga - fd).abs() / (GRAD_REL_TOL * fd.abs()).max(GRAD_ABS_FLOOR);
            report.checked += 1;
            if ratio > report.worst {
                report.worst = ratio;
                report.worst_at = format!("{name}[{e}]: reverse {ga:e}, differences {fd:e}");
            }
        }
    }
    report
}
