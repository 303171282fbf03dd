use serde::{Deserialize, Serialize};

use crate::rng::SeededRng;

/// Pointwise nonlinear map `u(x) = F(a(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PointwiseMap {
    /// `u = sin(m·a)`
    SingleFrequency { m: f64 },
    /// `u = Σ_{m=1}^{M} [A_m sin(m·a) + B_m cos(m·a)]`; `sin_coeffs[m-1] = A_m`.
    MultiFrequency {
        sin_coeffs: Vec<f64>,
        cos_coeffs: Vec<f64>,
    },
}

impl PointwiseMap {
    /// `M` terms with `A_m, B_m ~ U(-1, 1)`, fixed for a whole experiment.
    pub fn random_multi(terms: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let mut sin_coeffs = Vec::with_capacity(terms);
        let mut cos_coeffs = Vec::with_capacity(terms);
        for _ in 0..terms {
            sin_coeffs.push(rng.uniform(-1.0, 1.0));
            cos_coeffs.push(rng.uniform(-1.0, 1.0));
        }
        Self::MultiFrequency {
            sin_coeffs,
            cos_coeffs,
        }
    }

    pub fn eval(&self, a: f64) -> f64 {
        match self {
            Self::SingleFrequency { m } => (m * a).sin(),
            Self::MultiFrequency {
                sin_coeffs,
                cos_coeffs,
            } => sin_coeffs
                .iter()
                .zip(cos_coeffs)
                .enumerate()
                .map(|(i, (s, c))| {
                    let ma = (i + 1) as f64 * a;
                    s * ma.sin() + c * ma.cos()
                })
                .sum(),
        }
    }

    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        a.iter().map(|&v| self.eval(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_cases() {
        assert!(PointwiseMap::SingleFrequency { m: 20.0 }
            .apply(&[0.0; 6])
            .iter()
            .all(|&v| v == 0.0));
        let map = PointwiseMap::random_multi(7, 1);
        let PointwiseMap::MultiFrequency { cos_coeffs, .. } = &map else {
            unreachable!()
        };
        let expected: f64 = cos_coeffs.iter().sum();
        assert!(map.apply(&[0.0; 3]).iter().all(|&v| (v - expected).abs() < 1e-15));
    }

    #[test]
    fn multi_matches_straight_line_evaluation() {
        let map = PointwiseMap::MultiFrequency {
            sin_coeffs: vec![0.3, -0.8, 0.5],
            cos_coeffs: vec![-0.1, 0.9, 0.25],
        };
        for &a in &[-0.93_f64, -0.2, 0.0, 0.41, 1.0] {
            let direct = 0.3 * a.sin() - 0.1 * a.cos() - 0.8 * (2.0 * a).sin() + 0.9 * (2.0 * a).cos()
                + 0.5 * (3.0 * a).sin()
                + 0.25 * (3.0 * a).cos();
            assert!((map.eval(a) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn coefficients_fixed_by_seed() {
        assert_eq!(PointwiseMap::random_multi(5, 2), PointwiseMap::random_multi(5, 2));
    }
}
