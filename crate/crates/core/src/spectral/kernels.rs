//! Slice-level kernels shared by the differentiation graph and `Spectrum`.
//!
//! Batched layouts: signals are `[batch, n, ch]`, spectra `[batch, k, ch]`,
//! mixing weights `[k, c_out, c_in]`, all row-major.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Number of distinct nonnegative frequencies of a real length-`n` signal.
pub fn max_modes(n: usize) -> usize {
    n / 2 + 1
}

pub(crate) fn check_modes(n: usize, k_max: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("signal length {n} < 2")));
    }
    if k_max == 0 || k_max > max_modes(n) {
        return Err(Error::invalid(format!(
            "k_max = {k_max} outside 1..={} for n = {n}",
            max_modes(n)
        )));
    }
    Ok(())
}

/// `c += op(a) · op(b)` with `c` of shape `m × n`, contraction length `k`.
/// `a` is stored `m × k` (or `k × m` when `a_t`), `b` is `k × n` (or `n × k`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    beta: f64,
) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    let (rsa, csa) = if a_t { (1, m) } else { (k, 1) };
    let (rsb, csb) = if b_t { (1, k) } else { (n, 1) };
    // SAFETY: strides describe in-bounds views of slices whose lengths were checked above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub(crate) fn rdft(x: &[f64], batch: usize, n: usize, ch: usize, k_max: usize) -> Vec<Complex64> {
    let fft = plan(n, FftDirection::Forward);
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut out = vec![Complex64::default(); batch * k_max * ch];
    for b in 0..batch {
        for c in 0..ch {
            for (j, z) in buf.iter_mut().enumerate() {
                *z = Complex64::new(x[(b * n + j) * ch + c], 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..k_max {
                out[(b * k_max + k) * ch + c] = buf[k];
            }
        }
    }
    out
}

/// Gradient of `rdft` with respect to its real input:
/// `dL/dx[j] = Re Σ_k g[k] e^{+2πi kj/n}`.
pub(crate) fn rdft_adjoint(
    g: &[Complex64],
    batch: usize,
    n: usize,
    ch: usize,
    k_max: usize,
) -> Vec<f64> {
    let fft = plan(n, FftDirection::Inverse);
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut out = vec![0.0; batch * n * ch];
    for b in 0..batch {
        for c in 0..ch {
            buf.fill(Complex64::default());
            for k in 0..k_max {
                buf[k] = g[(b * k_max + k) * ch + c];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..n {
                out[(b * n + j) * ch + c] = buf[j].re;
            }
        }
    }
    out
}

/// Whether mode `k` is self-conjugate (DC, or Nyquist for even `n`).
fn self_conjugate(k: usize, n: usize) -> bool {
    k == 0 || 2 * k == n
}

pub(crate) fn irdft(y: &[Complex64], batch: usize, k_max: usize, ch: usize, n: usize) -> Vec<f64> {
    let fft = plan(n, FftDirection::Inverse);
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut out = vec![0.0; batch * n * ch];
    let inv_n = 1.0 / n as f64;
    for b in 0..batch {
        for c in 0..ch {
            buf.fill(Complex64::default());
            for k in 0..k_max {
                let z = y[(b * k_max + k) * ch + c];
                if self_conjugate(k, n) {
                    buf[k] = Complex64::new(z.re, 0.0);
                } else {
                    buf[k] = z;
                    buf[n - k] = z.conj();
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..n {
                out[(b * n + j) * ch + c] = buf[j].re * inv_n;
            }
        }
    }
    out
}

/// Gradient of `irdft` with respect to its modes (real-view convention):
/// `(α_k / n) Σ_j g[j] e^{-2πi kj/n}` with `α_k = 1` for self-conjugate
/// modes (whose imaginary part is ignored) and `2` otherwise.
pub(crate) fn irdft_adjoint(
    g: &[f64],
    batch: usize,
    k_max: usize,
    ch: usize,
    n: usize,
) -> Vec<Complex64> {
    let fft = plan(n, FftDirection::Forward);
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut out = vec![Complex64::default(); batch * k_max * ch];
    let inv_n = 1.0 / n as f64;
    for b in 0..batch {
        for c in 0..ch {
            for (j, z) in buf.iter_mut().enumerate() {
                *z = Complex64::new(g[(b * n + j) * ch + c], 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..k_max {
                out[(b * k_max + k) * ch + c] = if self_conjugate(k, n) {
                    Complex64::new(buf[k].re * inv_n, 0.0)
                } else {
                    buf[k] * (2.0 * inv_n)
                };
            }
        }
    }
    out
}

pub(crate) fn mix(
    spec: &[Complex64],
    w: &[Complex64],
    batch: usize,
    k_max: usize,
    c_in: usize,
    c_out: usize,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); batch * k_max * c_out];
    for b in 0..batch {
        for k in 0..k_max {
            let s = &spec[(b * k_max + k) * c_in..][..c_in];
            let o = &mut out[(b * k_max + k) * c_out..][..c_out];
            let wk = &w[k * c_out * c_in..][..c_out * c_in];
            for (l, acc) in o.iter_mut().enumerate() {
                let row = &wk[l * c_in..][..c_in];
                *acc = row.iter().zip(s).map(|(a, b)| a * b).sum();
            }
        }
    }
    out
}

/// Real-view gradients of `mix`: `g_spec[k,i] = Σ_l g[k,l]·conj(w[k,l,i])`
/// and `g_w[k,l,i] = Σ_b g[b,k,l]·conj(spec[b,k,i])`.
pub(crate) fn mix_adjoint(
    g: &[Complex64],
    spec: &[Complex64],
    w: &[Complex64],
    batch: usize,
    k_max: usize,
    c_in: usize,
    c_out: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut g_spec = vec![Complex64::default(); spec.len()];
    let mut g_w = vec![Complex64::default(); w.len()];
    for b in 0..batch {
        for k in 0..k_max {
            let s = &spec[(b * k_max + k) * c_in..][..c_in];
            let gs = &mut g_spec[(b * k_max + k) * c_in..][..c_in];
            let go = &g[(b * k_max + k) * c_out..][..c_out];
            let wk = &w[k * c_out * c_in..][..c_out * c_in];
            let gwk = &mut g_w[k * c_out * c_in..][..c_out * c_in];
            for (l, gl) in go.iter().enumerate() {
                let row = &wk[l * c_in..][..c_in];
                let grow = &mut gwk[l * c_in..][..c_in];
                for i in 0..c_in {
                    gs[i] += gl * row[i].conj();
                    grow[i] += gl * s[i].conj();
                }
            }
        }
    }
    (g_spec, g_w)
}
