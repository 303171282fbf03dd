use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::helmholtz::{downsample, helmholtz_solve, uniform_grid, HelmholtzProblem};
use super::pointwise::PointwiseMap;
use super::series::{gen_ood_input, normalize_sup, FourierSeriesSpec};
use super::{DatasetMeta, SampleSet, Splits};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

/// Named experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `u = sin(20a)`, `a` a normalized sine series up to `n = 50`, 1001 points.
    SingleFrequency,
    /// `u = Σ_{m≤M} A_m sin(ma) + B_m cos(ma)`, `a` up to `n = 10`.
    MultiFrequency { terms: usize },
    /// Helmholtz on `[-1, 1]`, `ω` up to `n = 500`.
    Helmholtz,
    /// Helmholtz on `[-L, L]`, `ω` up to `n = 50`, mesh size fixed at `2/1000`.
    HelmholtzLength { half_length: usize },
    /// As `HelmholtzLength { 10 }` but the test split uses the
    /// out-of-distribution input family.
    OutOfDistribution,
    /// Reduced single-frequency task: `n_max = 20`, 257 points.
    Desk,
}

const MAP_STREAM: u64 = 0xA5A5_0000_0000_0001;

impl Preset {
    pub const NAMES: &'static [&'static str] = &[
        "ex4.1",
        "ex4.2-m<M>",
        "ex4.3",
        "ex4.4-l<L>",
        "ex4.5",
        "desk",
    ];

    pub fn default_counts(&self) -> SplitCounts {
        match self {
            Self::SingleFrequency | Self::MultiFrequency { .. } => SplitCounts {
                train: 1000,
                val: 500,
                test: 500,
            },
            Self::Helmholtz | Self::HelmholtzLength { .. } | Self::OutOfDistribution => SplitCounts {
                train: 800,
                val: 100,
                test: 100,
            },
            Self::Desk => SplitCounts {
                train: 400,
                val: 100,
                test: 100,
            },
        }
    }

    fn half_length(&self) -> usize {
        match self {
            Self::HelmholtzLength { half_length } => *half_length,
            Self::OutOfDistribution => 10,
            _ => 1,
        }
    }

    /// Points of the training grid.
    pub fn grid_points(&self) -> usize {
        match self {
            Self::Desk => 257,
            _ => 1000 * self.half_length() + 1,
        }
    }

    fn input_family(&self, seed: u64) -> FourierSeriesSpec {
        let (n_max, use_cos) = match self {
            Self::SingleFrequency => (50, false),
            Self::Desk => (20, false),
            Self::MultiFrequency { .. } => (10, true),
            Self::Helmholtz => (500, true),
            Self::HelmholtzLength { .. } | Self::OutOfDistribution => (50, true),
        };
        FourierSeriesSpec {
            n_max,
            use_sin: true,
            use_cos,
            seed,
        }
    }

    fn map(&self, seed: u64) -> Option<PointwiseMap> {
        match self {
            Self::SingleFrequency | Self::Desk => Some(PointwiseMap::SingleFrequency { m: 20.0 }),
            Self::MultiFrequency { terms } => {
                Some(PointwiseMap::random_multi(*terms, derive_seed(seed, MAP_STREAM)))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingleFrequency => write!(f, "ex4.1"),
            Self::MultiFrequency { terms } => write!(f, "ex4.2-m{terms}"),
            Self::Helmholtz => write!(f, "ex4.3"),
            Self::HelmholtzLength { half_length } => write!(f, "ex4.4-l{half_length}"),
            Self::OutOfDistribution => write!(f, "ex4.5"),
            Self::Desk => write!(f, "desk"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || {
            Error::Config(format!(
                "unknown preset `{s}`; valid presets: {}",
                Preset::NAMES.join(", ")
            ))
        };
        let positive = |v: &str| v.parse::<usize>().ok().filter(|&v| v > 0);
        Ok(match s {
            "ex4.1" => Self::SingleFrequency,
            "ex4.3" => Self::Helmholtz,
            "ex4.5" => Self::OutOfDistribution,
            "desk" => Self::Desk,
            _ => {
                if let Some(m) = s.strip_prefix("ex4.2-m") {
                    Self::MultiFrequency {
                        terms: positive(m).ok_or_else(unknown)?,
                    }
                } else if let Some(l) = s.strip_prefix("ex4.4-l") {
                    Self::HelmholtzLength {
                        half_length: positive(l).ok_or_else(unknown)?,
                    }
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

/// Generates a full dataset. Sample `i` draws from stream `(seed, i)`, so
/// content does not depend on generation order.
pub fn build_dataset(preset: Preset, seed: u64, counts: SplitCounts) -> Result<SampleSet> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::invalid("dataset must contain at least one sample"));
    }
    let family = preset.input_family(seed);
    let map = preset.map(seed);
    let half = preset.half_length() as f64;
    let coarse_n = preset.grid_points();
    let ood_from = match preset {
        Preset::OutOfDistribution => counts.train + counts.val,
        _ => total,
    };

    let helmholtz = match preset {
        Preset::Helmholtz | Preset::HelmholtzLength { .. } | Preset::OutOfDistribution => {
            let p = HelmholtzProblem::scattering(preset.half_length());
            p.validate()?;
            Some(p)
        }
        _ => None,
    };
    // Inputs live on the solver grid for PDE presets and are restricted with
    // the solution, so both share exactly the same sample points.
    let eval_grid = match &helmholtz {
        Some(p) => p.fine_grid(),
        None => uniform_grid(half, coarse_n),
    };
    let grid = downsample(&eval_grid, coarse_n)?;

    let mut inputs = Vec::with_capacity(total * coarse_n);
    let mut targets = Vec::with_capacity(total * coarse_n);
    for i in 0..total {
        let sample_seed = derive_seed(seed, i as u64);
        let a_eval = if i >= ood_from {
            gen_ood_input(sample_seed, &eval_grid)?
        } else {
            let mut rng = SeededRng::new(sample_seed);
            match normalize_sup(family.draw(&mut rng).eval(&eval_grid)) {
                Ok(v) => v,
                Err(_) => normalize_sup(family.draw(&mut rng).eval(&eval_grid))?,
            }
        };
        let (a, u) = match (&helmholtz, &map) {
            (Some(p), _) => {
                let u_fine = helmholtz_solve(p, &a_eval)?;
                (downsample(&a_eval, coarse_n)?, downsample(&u_fine, coarse_n)?)
            }
            (None, Some(m)) => {
                let u = m.apply(&a_eval);
                (a_eval, u)
            }
            (None, None) => unreachable!("every preset has a map or a PDE"),
        };
        inputs.extend(a);
        targets.extend(u);
    }

    let meta = DatasetMeta {
        preset: preset.to_string(),
        seed,
        half_length: half,
        input_family: family,
        map,
        helmholtz,
        ood_split: (preset == Preset::OutOfDistribution).then(|| "test".to_string()),
    };
    SampleSet::new(grid, inputs, targets, Splits::contiguous(counts), meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for name in ["ex4.1", "ex4.2-m200", "ex4.3", "ex4.4-l10", "ex4.5", "desk"] {
            assert_eq!(name.parse::<Preset>().unwrap().to_string(), name);
        }
        for bad in ["ex4.2-m0", "ex4.4-lx", "ex9", ""] {
            let err = bad.parse::<Preset>().unwrap_err().to_string();
            assert!(err.contains("ex4.1"), "{err}");
        }
    }

    #[test]
    fn published_split_sizes() {
        assert_eq!(Preset::SingleFrequency.default_counts().total(), 2000);
        assert_eq!(
            Preset::Helmholtz.default_counts(),
            SplitCounts {
                train: 800,
                val: 100,
                test: 100
            }
        );
        assert_eq!(Preset::SingleFrequency.grid_points(), 1001);
        assert_eq!(Preset::HelmholtzLength { half_length: 10 }.grid_points(), 10001);
    }

    #[test]
    fn small_pointwise_dataset() {
        let counts = SplitCounts {
            train: 4,
            val: 2,
            test: 2,
        };
        let d = build_dataset(Preset::SingleFrequency, 1, counts).unwrap();
        assert_eq!((d.len(), d.n()), (8, 1001));
        assert!(d.splits().is_partition_of(8));
        assert_eq!(d.grid()[0], -1.0);
        assert_eq!(d.grid()[1000], 1.0);
        for i in 0..d.len() {
            let a = d.input(i);
            assert_eq!(a.iter().fold(0.0_f64, |m, x| m.max(x.abs())), 1.0);
            for (u, a) in d.target(i).iter().zip(a) {
                assert_eq!(*u, (20.0 * a).sin());
            }
        }
        assert_eq!(d, build_dataset(Preset::SingleFrequency, 1, counts).unwrap());
    }

    #[test]
    fn multi_frequency_coefficients_in_metadata() {
        let counts = SplitCounts {
            train: 2,
            val: 1,
            test: 1,
        };
        let d = build_dataset(Preset::MultiFrequency { terms: 10 }, 3, counts).unwrap();
        match &d.meta().map {
            Some(PointwiseMap::MultiFrequency { sin_coeffs, .. }) => assert_eq!(sin_coeffs.len(), 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn helmholtz_dataset_on_coarse_grid() {
        let counts = SplitCounts {
            train: 1,
            val: 1,
            test: 1,
        };
        let d = build_dataset(Preset::Helmholtz, 0, counts).unwrap();
        assert_eq!(d.n(), 1001);
        let u = d.target(0);
        assert_eq!((u[0], u[1000]), (0.0, 0.0));
        assert!(u.iter().any(|v| v.abs() > 1e-4));
    }

    #[test]
    fn ood_preset_marks_test_split() {
        let counts = SplitCounts {
            train: 1,
            val: 1,
            test: 1,
        };
        let d = build_dataset(Preset::OutOfDistribution, 0, counts).unwrap();
        assert_eq!(d.n(), 10001);
        assert_eq!(d.meta().ood_split.as_deref(), Some("test"));
    }
}
