use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Random trigonometric series `Σ_{n=0}^{n_max} [a_n sin(nπx) + b_n cos(nπx)]`
/// with coefficients uniform in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeriesSpec {
    pub n_max: usize,
    pub use_sin: bool,
    pub use_cos: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    /// `a_n`, `n = 0..=n_max` (all zero when sines are disabled).
    pub sin: Vec<f64>,
    /// `b_n`, `n = 0..=n_max` (all zero when cosines are disabled).
    pub cos: Vec<f64>,
}

impl FourierSeriesSpec {
    pub fn draw(&self, rng: &mut SeededRng) -> SeriesCoefficients {
        let mut sin = vec![0.0; self.n_max + 1];
        let mut cos = vec![0.0; self.n_max + 1];
        for n in 0..=self.n_max {
            if self.use_sin {
                sin[n] = rng.uniform(-1.0, 1.0);
            }
            if self.use_cos {
                cos[n] = rng.uniform(-1.0, 1.0);
            }
        }
        SeriesCoefficients { sin, cos }
    }
}

impl SeriesCoefficients {
    /// Evaluates the series at every grid point, summing in ascending `n`.
    /// `e^{inπx}` is advanced by repeated rotation.
    pub fn eval(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter()
            .map(|&x| {
                let step = Complex64::from_polar(1.0, PI * x);
                let mut z = Complex64::new(1.0, 0.0);
                let mut acc = 0.0;
                for (a, b) in self.sin.iter().zip(&self.cos) {
                    acc += a * z.im + b * z.re;
                    z *= step;
                }
                acc
            })
            .collect()
    }
}

/// Divides by `max_j |v_j|`, so the result has sup-norm exactly 1.
pub fn normalize_sup(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if peak.is_nan() || peak <= 0.0 || !peak.is_finite() {
        return Err(Error::invalid("cannot normalize an identically zero function"));
    }
    v.iter_mut().for_each(|x| *x /= peak);
    Ok(v)
}

/// Draws a normalized random series on `grid`; an identically zero draw is
/// retried once.
pub fn gen_input_function(spec: &FourierSeriesSpec, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    let mut rng = SeededRng::new(spec.seed);
    match normalize_sup(spec.draw(&mut rng).eval(grid)) {
        Ok(v) => Ok(v),
        Err(_) => normalize_sup(spec.draw(&mut rng).eval(grid)),
    }
}

/// Out-of-distribution inputs
/// `η(x) = Σ_{n=1}^{50} a_n sin(k_n x³) + b_n cos(l_n x²)`, normalized to
/// sup-norm 1, with `a_n, b_n ~ U(-1,1)`, `k_n ~ U(0,30)`, `l_n ~ U(40,60)`.
pub fn gen_ood_input(seed: u64, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    let mut rng = SeededRng::new(seed);
    let draw = |rng: &mut SeededRng| {
        (0..50)
            .map(|_| {
                let a = rng.uniform(-1.0, 1.0);
                let b = rng.uniform(-1.0, 1.0);
                let k = rng.uniform(0.0, 30.0);
                let l = rng.uniform(40.0, 60.0);
                (a, b, k, l)
            })
            .collect::<Vec<_>>()
    };
    let eval = |terms: &[(f64, f64, f64, f64)]| {
        grid.iter()
            .map(|&x| {
                let (x2, x3) = (x * x, x * x * x);
                terms.iter().map(|&(a, b, k, l)| a * (k * x3).sin() + b * (l * x2).cos()).sum()
            })
            .collect::<Vec<f64>>()
    };
    match normalize_sup(eval(&draw(&mut rng))) {
        Ok(v) => Ok(v),
        Err(_) => normalize_sup(eval(&draw(&mut rng))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, half: f64) -> Vec<f64> {
        (0..n).map(|j| -half + 2.0 * half * j as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn single_term_normalization() {
        let g = grid(101, 1.0);
        let mut c = SeriesCoefficients {
            sin: vec![0.0; 4],
            cos: vec![0.0; 4],
        };
        c.sin[1] = 1.0;
        let out = normalize_sup(c.eval(&g)).unwrap();
        let peak = g.iter().map(|x| (PI * x).sin().abs()).fold(0.0, f64::max);
        for (o, x) in out.iter().zip(&g) {
            assert!((o - (PI * x).sin() / peak).abs() < 1e-14);
        }
    }

    #[test]
    fn sup_norm_is_exactly_one() {
        let g = grid(257, 1.0);
        for seed in 0..100 {
            let spec = FourierSeriesSpec {
                n_max: 20,
                use_sin: true,
                use_cos: seed % 2 == 0,
                seed,
            };
            let v = gen_input_function(&spec, &g).unwrap();
            assert_eq!(v.iter().fold(0.0_f64, |m, x| m.max(x.abs())), 1.0);
        }
    }

    #[test]
    fn seeded_determinism() {
        let g = grid(65, 1.0);
        let spec = |seed| FourierSeriesSpec {
            n_max: 10,
            use_sin: true,
            use_cos: true,
            seed,
        };
        assert_eq!(gen_input_function(&spec(4), &g).unwrap(), gen_input_function(&spec(4), &g).unwrap());
        assert_ne!(gen_input_function(&spec(4), &g).unwrap(), gen_input_function(&spec(5), &g).unwrap());
    }

    #[test]
    fn rotation_matches_direct_trig() {
        let g = grid(333, 1.0);
        let c = FourierSeriesSpec {
            n_max: 500,
            use_sin: true,
            use_cos: true,
            seed: 1,
        }
        .draw(&mut SeededRng::new(1));
        let fast = c.eval(&g);
        for (j, &x) in g.iter().enumerate().step_by(17) {
            let direct: f64 = (0..=500)
                .map(|n| c.sin[n] * (n as f64 * PI * x).sin() + c.cos[n] * (n as f64 * PI * x).cos())
                .sum();
            assert!((fast[j] - direct).abs() < 1e-10, "{} vs {}", fast[j], direct);
        }
    }

    #[test]
    fn zero_function_cannot_be_normalized() {
        assert!(normalize_sup(vec![0.0; 5]).is_err());
    }

    #[test]
    fn ood_inputs_normalized_and_seeded() {
        let g = grid(2001, 10.0);
        let a = gen_ood_input(3, &g).unwrap();
        assert_eq!(a.iter().fold(0.0_f64, |m, x| m.max(x.abs())), 1.0);
        assert_eq!(a, gen_ood_input(3, &g).unwrap());
        assert_ne!(a, gen_ood_input(4, &g).unwrap());
    }
}
