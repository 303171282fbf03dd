//! Real-input DFT with mode truncation and per-mode complex channel mixing.
//!
//! Conventions: the forward transform is unnormalized,
//! `X[k] = Σ_j x[j] e^{-2πi kj/n}`, and keeps modes `0..k_max`. The inverse
//! carries the `1/n` factor and rebuilds the negative frequencies by Hermitian
//! symmetry, so its output is exactly real. The imaginary parts of the DC and
//! (for even `n`) Nyquist modes do not contribute to the inverse.

pub(crate) mod kernels;

use num_complex::Complex64;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

pub use kernels::max_modes;

/// Lowest `k_max` Fourier modes of a real `[n, channels]` signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    modes: Vec<Complex64>,
    n_signal: usize,
    k_max: usize,
    channels: usize,
}

impl Spectrum {
    /// Forward transform of a `[n, channels]` (or `[n]`) real signal.
    pub fn of(signal: &Tensor, k_max: usize) -> Result<Self> {
        let (n, channels) = match signal.shape() {
            [n] => (*n, 1),
            [n, c] => (*n, *c),
            s => return Err(Error::invalid(format!("rdft: expected [n] or [n, c], got {s:?}"))),
        };
        if n < 2 {
            return Err(Error::invalid(format!("rdft: signal length {n} < 2")));
        }
        kernels::check_modes(n, k_max)?;
        let modes = kernels::rdft(signal.as_real()?, 1, n, channels, k_max);
        Ok(Self {
            modes,
            n_signal: n,
            k_max,
            channels,
        })
    }

    /// Full half-spectrum (`floor(n/2) + 1` modes).
    pub fn full(signal: &Tensor) -> Result<Self> {
        let n = signal.shape().first().copied().unwrap_or(0);
        Self::of(signal, max_modes(n))
    }

    pub fn from_modes(modes: Tensor, n_signal: usize) -> Result<Self> {
        let (k_max, channels) = match modes.shape() {
            [k, c] => (*k, *c),
            s => return Err(Error::invalid(format!("spectrum modes must be [k, c], got {s:?}"))),
        };
        kernels::check_modes(n_signal, k_max)?;
        Ok(Self {
            modes: modes.as_complex()?.to_vec(),
            n_signal,
            k_max,
            channels,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn n_signal(&self) -> usize {
        self.n_signal
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn mode(&self, k: usize, channel: usize) -> Complex64 {
        self.modes[k * self.channels + channel]
    }

    pub fn modes(&self) -> Tensor {
        Tensor::complex(&[self.k_max, self.channels], self.modes.clone())
            .expect("spectrum buffer matches its shape")
    }

    /// Magnitudes of one channel, ascending mode index.
    pub fn magnitudes(&self, channel: usize) -> Vec<f64> {
        (0..self.k_max).map(|k| self.mode(k, channel).norm()).collect()
    }

    /// Keeps only the lowest `k` modes.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k_max {
            return Err(Error::invalid(format!(
                "truncate: {k} modes requested from a spectrum of {}",
                self.k_max
            )));
        }
        Ok(Self {
            modes: self.modes[..k * self.channels].to_vec(),
            k_max: k,
            ..self.clone()
        })
    }

    /// `out[k, l] = Σ_i weights[k, l, i] · self[k, i]` for a complex
    /// `[k_max, c_out, c_in]` weight tensor.
    pub fn mix(&self, weights: &Tensor) -> Result<Self> {
        let ws = weights.shape();
        if ws.len() != 3 || ws[0] != self.k_max || ws[2] != self.channels {
            return Err(Error::ShapeMismatch {
                op: "spectral_mix",
                left: vec![self.k_max, self.channels],
                right: ws.to_vec(),
            });
        }
        let modes = kernels::mix(
            &self.modes,
            weights.as_complex()?,
            1,
            self.k_max,
            self.channels,
            ws[1],
        );
        Ok(Self {
            modes,
            channels: ws[1],
            ..self.clone()
        })
    }

    /// Real `[n, channels]` signal; modes at or above `k_max` are zero.
    pub fn inverse(&self, n: usize) -> Result<Tensor> {
        if n < 2 {
            return Err(Error::invalid(format!("irdft: signal length {n} < 2")));
        }
        kernels::check_modes(n, self.k_max)?;
        let out = kernels::irdft(&self.modes, 1, self.k_max, self.channels, n);
        Tensor::real(&[n, self.channels], out)
    }
}
