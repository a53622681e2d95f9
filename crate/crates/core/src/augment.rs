//! Linear-combination augmentation.
//!
//! Pairs of single-analyte samples are blended as
//! `x = lambda * x_i + (1 - lambda) * x_j`, `y = lambda * y_i + (1 - lambda) * y_j`
//! with `lambda ~ U(lambda_min, lambda_max)`, standing in for mixtures that were
//! never measured.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::signals::{AnalyteMix, FeatureVector};
use crate::targets::TargetVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixPolicy {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub mix_probability: f64,
    pub seed: u64,
}

impl Default for MixPolicy {
    fn default() -> Self {
        Self {
            lambda_min: 0.3,
            lambda_max: 0.7,
            mix_probability: 0.5,
            seed: 0,
        }
    }
}

impl MixPolicy {
    pub fn disabled() -> Self {
        Self {
            mix_probability: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 <= self.lambda_min
            && self.lambda_min <= self.lambda_max
            && self.lambda_max <= 1.0
            && (0.0..=1.0).contains(&self.mix_probability);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "mix policy needs 0 <= lambda_min <= lambda_max <= 1 and mix_probability in [0, 1]: {self:?}"
            )))
        }
    }
}

/// Uniform draw on `[lambda_min, lambda_max]`.
pub fn sample_lambda<R: Rng>(policy: &MixPolicy, rng: &mut R) -> f64 {
    if policy.lambda_min == policy.lambda_max {
        policy.lambda_min
    } else {
        rng.random_range(policy.lambda_min..=policy.lambda_max)
    }
}

fn lerp(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
        .collect()
}

/// Blend two (features, target) pairs with weight `lambda` on the first.
pub fn mix_pair(
    x_i: &FeatureVector,
    y_i: &TargetVector,
    x_j: &FeatureVector,
    y_j: &TargetVector,
    lambda: f64,
) -> Result<(FeatureVector, TargetVector)> {
    if x_i.len() != x_j.len() || y_i.len() != y_j.len() {
        return Err(Error::Dimension(format!(
            "cannot mix features {} / {} with targets {} / {}",
            x_i.len(),
            x_j.len(),
            y_i.len(),
            y_j.len()
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Range(format!("lambda {lambda} outside [0, 1]")));
    }
    let x = FeatureVector {
        values: lerp(&x_i.values, &x_j.values, lambda),
        window_length_s: x_i.window_length_s,
        provenance: format!("mix({}, {})", x_i.provenance, x_j.provenance),
    };
    let y = TargetVector {
        values: lerp(&y_i.values, &y_j.values, lambda),
    };
    Ok((x, y))
}

/// Positive when either constituent contains the target analyte. The lambda
/// bounds keep every constituent at weight >= `lambda_min`.
pub fn binary_label_of_mix(first: &AnalyteMix, second: &AnalyteMix, target_analyte: &str) -> bool {
    first.contains(target_analyte) || second.contains(target_analyte)
}

/// Anything that can be blended with a partner of the same shape.
pub trait Interpolate: Sized + Clone {
    fn interpolate(&self, other: &Self, lambda: f64) -> Result<Self>;
}

impl Interpolate for (FeatureVector, TargetVector) {
    fn interpolate(&self, other: &Self, lambda: f64) -> Result<Self> {
        mix_pair(&self.0, &self.1, &other.0, &other.1, lambda)
    }
}

/// A training example carrying its regression target and binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub target: TargetVector,
    pub positive: bool,
}

impl Interpolate for LabeledSample {
    fn interpolate(&self, other: &Self, lambda: f64) -> Result<Self> {
        let (features, target) =
            mix_pair(&self.features, &self.target, &other.features, &other.target, lambda)?;
        Ok(Self {
            features,
            target,
            positive: self.positive || other.positive,
        })
    }
}

/// Result of [`augment_batch`]; `warnings` is non-empty when mixing was requested
/// but impossible.
#[derive(Debug, Clone, PartialEq)]
pub struct Augmented<T> {
    pub batch: Vec<T>,
    pub warnings: Vec<String>,
}

/// Replace each element, with probability `mix_probability`, by its blend with
/// a uniformly chosen distinct partner from the original batch.
pub fn augment_batch<T: Interpolate, R: Rng>(
    batch: &[T],
    policy: &MixPolicy,
    rng: &mut R,
) -> Result<Augmented<T>> {
    policy.validate()?;
    let n = batch.len();
    if policy.mix_probability == 0.0 {
        return Ok(Augmented {
            batch: batch.to_vec(),
            warnings: Vec::new(),
        });
    }
    if n < 2 {
        let msg = format!("batch of size {n} cannot be mixed; passed through");
        warn!("{msg}");
        return Ok(Augmented {
            batch: batch.to_vec(),
            warnings: vec![msg],
        });
    }
    let mut out = Vec::with_capacity(n);
    for (i, item) in batch.iter().enumerate() {
        if rng.random::<f64>() < policy.mix_probability {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let lambda = sample_lambda(policy, rng);
            out.push(item.interpolate(&batch[j], lambda)?);
        } else {
            out.push(item.clone());
        }
    }
    Ok(Augmented {
        batch: out,
        warnings: Vec::new(),
    })
}
