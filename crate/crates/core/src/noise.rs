//! Label-noise models and injection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::rng;

/// Largest rate a non-uniform family may produce; keeps every rate below 1/2.
pub const NON_UNIFORM_CAP: f64 = 0.4999;

/// Feature-dependent flip-rate families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NonUniform {
    /// `clip(intercept + slope * x[0], 0, NON_UNIFORM_CAP)`.
    Affine { intercept: f64, slope: f64 },
}

impl NonUniform {
    pub fn rate(&self, x: &[f64]) -> f64 {
        match *self {
            NonUniform::Affine { intercept, slope } => (intercept + slope * x[0]).clamp(0.0, NON_UNIFORM_CAP),
        }
    }
}

/// How labels are corrupted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    /// Every label flips with the same probability.
    Symmetric(f64),
    /// Flip probability depends on the true class only.
    ClassConditional { pos: f64, neg: f64 },
    /// Flip probability is a function of the feature vector.
    NonUniform(NonUniform),
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, r: f64| {
            if (0.0..1.0).contains(&r) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} noise rate {r} outside [0, 1)")))
            }
        };
        match *self {
            NoiseModel::Symmetric(eta) => check("symmetric", eta),
            NoiseModel::ClassConditional { pos, neg } => {
                check("positive-class", pos)?;
                check("negative-class", neg)
            }
            NoiseModel::NonUniform(NonUniform::Affine { intercept, slope }) => {
                if intercept.is_finite() && slope.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("affine noise parameters must be finite"))
                }
            }
        }
    }

    /// Flip probability for a sample with features `x` and true label `y`.
    pub fn rate(&self, x: &[f64], y: Label) -> f64 {
        match self {
            NoiseModel::Symmetric(eta) => *eta,
            NoiseModel::ClassConditional { pos, neg } => match y {
                Label::Pos => *pos,
                Label::Neg => *neg,
            },
            NoiseModel::NonUniform(family) => family.rate(x),
        }
    }

    pub fn is_noiseless(&self) -> bool {
        matches!(self, NoiseModel::Symmetric(eta) if *eta == 0.0)
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Symmetric(eta) => write!(f, "sym:{eta}"),
            NoiseModel::ClassConditional { pos, neg } => write!(f, "cc:{pos},{neg}"),
            NoiseModel::NonUniform(NonUniform::Affine { intercept, slope }) => {
                write!(f, "nu:affine:{intercept},{slope}")
            }
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// Parses `sym:<eta>`, `cc:<eta+>,<eta->` or `nu:affine:<a>,<b>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::invalid(format!(
                "bad noise model {s:?} (expected sym:η, cc:η+,η- or nu:affine:a,b)"
            ))
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let pair = |t: &str| -> Result<(f64, f64)> {
            let (a, b) = t.split_once(',').ok_or_else(bad)?;
            Ok((num(a)?, num(b)?))
        };
        let model = if let Some(rest) = s.strip_prefix("sym:") {
            NoiseModel::Symmetric(num(rest)?)
        } else if let Some(rest) = s.strip_prefix("cc:") {
            let (pos, neg) = pair(rest)?;
            NoiseModel::ClassConditional { pos, neg }
        } else if let Some(rest) = s.strip_prefix("nu:affine:") {
            let (intercept, slope) = pair(rest)?;
            NoiseModel::NonUniform(NonUniform::Affine { intercept, slope })
        } else {
            return Err(bad());
        };
        model.validate()?;
        Ok(model)
    }
}

/// A dataset whose labels went through a noise model.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyDataset {
    data: Dataset,
    flip_mask: Vec<bool>,
    model: NoiseModel,
    seed: u64,
}

impl NoisyDataset {
    /// Features with the noisy labels.
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn into_data(self) -> Dataset {
        self.data
    }

    /// `flip_mask()[i]` is true iff label `i` differs from the source label.
    pub fn flip_mask(&self) -> &[bool] {
        &self.flip_mask
    }

    pub fn model(&self) -> NoiseModel {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn flip_count(&self) -> usize {
        self.flip_mask.iter().filter(|&&z| z).count()
    }
}

impl AsRef<Dataset> for NoisyDataset {
    fn as_ref(&self) -> &Dataset {
        &self.data
    }
}

/// Flips each label of `ds` independently with its model rate.
///
/// One uniform draw is consumed per sample, in sample order, so the flip
/// decision for sample `i` depends only on `(seed, i)` and on its own rate.
/// Two symmetric models with rates `a < b` and the same seed therefore flip
/// nested sets of samples.
pub fn inject_noise(ds: &Dataset, model: NoiseModel, seed: u64) -> Result<NoisyDataset> {
    model.validate()?;
    let mut rng = rng::seeded(seed);
    let mut flip_mask = Vec::with_capacity(ds.n());
    let mut labels = Vec::with_capacity(ds.n());
    for (x, &y) in ds.rows().zip(ds.labels()) {
        let u: f64 = rng.gen();
        let flip = u < model.rate(x, y);
        flip_mask.push(flip);
        labels.push(if flip { y.flipped() } else { y });
    }
    Ok(NoisyDataset {
        data: ds.with_labels(labels)?,
        flip_mask,
        model,
        seed,
    })
}

/// Large-sample positive fraction after symmetric noise: `p(1 - 2η) + η`.
pub fn expected_noisy_fraction(p: f64, eta: f64) -> f64 {
    p * (1.0 - 2.0 * eta) + eta
}
