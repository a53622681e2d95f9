//! Random search over the published hyperparameter lists with stratified
//! K-fold cross-validation scored by MCC.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::folds::kfold_split;
use super::pipeline::{fit, Context, Sample};
use crate::classify::{accuracy, confusion, mcc};
use crate::seed::{derive_seed, derived_rng};
use crate::signals::Split;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    ChemviseSvc,
    ChemviseKnn,
    ChemvisePcaSvc,
    Ffnn,
    RawSvc,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::ChemviseSvc,
        Family::ChemviseKnn,
        Family::ChemvisePcaSvc,
        Family::Ffnn,
        Family::RawSvc,
    ];

    pub fn uses_network(self) -> bool {
        !matches!(self, Family::RawSvc)
    }

    pub fn uses_svc(self) -> bool {
        matches!(self, Family::ChemviseSvc | Family::ChemvisePcaSvc | Family::RawSvc)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::ChemviseSvc => "chemvise-svc",
            Family::ChemviseKnn => "chemvise-knn",
            Family::ChemvisePcaSvc => "chemvise-pca-svc",
            Family::Ffnn => "ffnn",
            Family::RawSvc => "raw-svc",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown model family `{s}`")))
    }
}

/// Search lists for the network families and the SVC heads, plus the search
/// budget and cross-validation shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub widths: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub epochs: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    /// `C` is drawn uniformly from this interval.
    pub c_range: (f64, f64),
    pub class_weights: Vec<f64>,
    pub budget: usize,
    pub n_folds: usize,
    pub n_repeats: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            widths: vec![128, 512, 1024, 2048, 4096, 8192],
            learning_rates: vec![1e-7, 5e-7, 1e-6, 5e-6, 1e-5],
            epochs: vec![1000, 2000, 4000],
            batch_sizes: vec![4, 8, 16, 32],
            c_range: (1e-4, 8e-3),
            class_weights: vec![1.0, 2.0, 4.0],
            budget: 25,
            n_folds: 5,
            n_repeats: 5,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("search budget must be at least 1".into()));
        }
        if self.n_folds < 2 || self.n_repeats == 0 {
            return Err(Error::Config(format!(
                "need at least 2 folds and 1 repeat, got {} and {}",
                self.n_folds, self.n_repeats
            )));
        }
        if self.widths.is_empty()
            || self.learning_rates.is_empty()
            || self.epochs.is_empty()
            || self.batch_sizes.is_empty()
            || self.class_weights.is_empty()
        {
            return Err(Error::Config("empty hyperparameter list".into()));
        }
        let (lo, hi) = self.c_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Config(format!("invalid C range ({lo}, {hi})")));
        }
        if self.class_weights.iter().any(|w| !(*w >= 1.0)) {
            return Err(Error::Config("class weights must be at least 1".into()));
        }
        Ok(())
    }

    /// Draw one configuration for `family`.
    pub fn sample<R: Rng>(&self, family: Family, rng: &mut R) -> HyperParams {
        let net = family.uses_network().then(|| NetParams {
            width: *self.widths.choose(rng).unwrap(),
            learning_rate: *self.learning_rates.choose(rng).unwrap(),
            epochs: *self.epochs.choose(rng).unwrap(),
            batch_size: *self.batch_sizes.choose(rng).unwrap(),
        });
        let svc = family.uses_svc().then(|| {
            let (lo, hi) = self.c_range;
            SvcParams {
                c: if lo == hi { lo } else { rng.random_range(lo..hi) },
                class_weight: *self.class_weights.choose(rng).unwrap(),
            }
        });
        HyperParams { net, svc }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    pub width: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvcParams {
    pub c: f64,
    pub class_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HyperParams {
    pub net: Option<NetParams>,
    pub svc: Option<SvcParams>,
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(n) = &self.net {
            parts.push(format!("width={}", n.width));
            parts.push(format!("lr={:e}", n.learning_rate));
            parts.push(format!("epochs={}", n.epochs));
            parts.push(format!("batch={}", n.batch_size));
        }
        if let Some(s) = &self.svc {
            parts.push(format!("C={}", s.c));
            parts.push(format!("class_weight={}", s.class_weight));
        }
        f.write_str(&parts.join(";"))
    }
}

/// Hyperparameters fixed before any holdout data is read. Only a completed
/// search (or an explicit single-draw freeze) produces one.
#[derive(Debug, Clone, PartialEq)]
pub struct Frozen {
    params: HyperParams,
    mean_cv_mcc: Option<f64>,
}

impl Frozen {
    pub(crate) fn without_search(params: HyperParams) -> Self {
        Self {
            params,
            mean_cv_mcc: None,
        }
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn mean_cv_mcc(&self) -> Option<f64> {
        self.mean_cv_mcc
    }
}

/// One validation fold of one sampled configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub candidate: usize,
    pub fold: usize,
    pub hyperparameters: String,
    pub mcc: f64,
    pub accuracy: f64,
}

/// Sample `budget` configurations, score each by mean validation MCC over
/// stratified folds of `train`, and freeze the best (earliest on ties).
pub fn grid_search(
    family: Family,
    grid: &GridSpec,
    train: &[Sample],
    ctx: &Context,
    seed: u64,
) -> Result<(Frozen, Vec<CvRow>)> {
    grid.validate()?;
    if let Some(s) = train
        .iter()
        .find(|s| s.split == Split::Test || !s.mix.is_single())
    {
        return Err(Error::Hygiene(format!(
            "grid search offered {} ({}); only single-analyte training trials are allowed",
            s.id, s.split
        )));
    }
    let labels: Vec<bool> = train.iter().map(|s| ctx.label(&s.mix)).collect();
    let folds = kfold_split(&labels, grid.n_folds, derive_seed(seed, "folds"))?;
    let mut rng = derived_rng(seed, "sample");
    let candidates: Vec<HyperParams> = (0..grid.budget).map(|_| grid.sample(family, &mut rng)).collect();

    let mut table = Vec::with_capacity(grid.budget * grid.n_folds);
    let mut best: Option<(usize, f64)> = None;
    for (c, params) in candidates.iter().enumerate() {
        let mut total = 0.0;
        for (f, (train_idx, val_idx)) in folds.iter().enumerate() {
            let fold_train: Vec<Sample> = train_idx.iter().map(|&i| train[i].clone()).collect();
            let fitted = fit(
                family,
                params,
                &fold_train,
                ctx,
                derive_seed(seed, &format!("candidate/{c}/fold/{f}")),
            )?;
            let xs: Vec<_> = val_idx.iter().map(|&i| &train[i].features).collect();
            let preds = fitted.predict(&xs)?;
            let truth: Vec<bool> = val_idx.iter().map(|&i| labels[i]).collect();
            let counts = confusion(&preds, &truth)?;
            let score = mcc(&counts);
            total += score;
            table.push(CvRow {
                candidate: c,
                fold: f,
                hyperparameters: params.to_string(),
                mcc: score,
                accuracy: accuracy(&counts),
            });
        }
        let mean = total / grid.n_folds as f64;
        if best.is_none_or(|(_, m)| mean > m) {
            best = Some((c, mean));
        }
    }
    let (index, score) = best.expect("budget is at least 1");
    Ok((
        Frozen {
            params: candidates[index].clone(),
            mean_cv_mcc: Some(score),
        },
        table,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("xgboost".parse::<Family>().is_err());
    }

    #[test]
    fn samples_come_from_lists() {
        let grid = GridSpec::default();
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let p = grid.sample(Family::ChemviseSvc, &mut rng);
            let n = p.net.unwrap();
            let s = p.svc.unwrap();
            assert!(grid.widths.contains(&n.width));
            assert!(grid.learning_rates.contains(&n.learning_rate));
            assert!(grid.epochs.contains(&n.epochs));
            assert!(grid.batch_sizes.contains(&n.batch_size));
            assert!((1e-4..8e-3).contains(&s.c));
            assert!(grid.class_weights.contains(&s.class_weight));
        }
        assert!(grid.sample(Family::Ffnn, &mut rng).svc.is_none());
        assert!(grid.sample(Family::ChemviseKnn, &mut rng).svc.is_none());
        assert!(grid.sample(Family::RawSvc, &mut rng).net.is_none());
    }

    #[test]
    fn validation() {
        let mut g = GridSpec::default();
        g.budget = 0;
        assert!(g.validate().is_err());
        let mut g = GridSpec::default();
        g.n_folds = 1;
        assert!(g.validate().is_err());
        let mut g = GridSpec::default();
        g.widths.clear();
        assert!(g.validate().is_err());
    }

    #[test]
    fn display() {
        let p = HyperParams {
            net: Some(NetParams {
                width: 128,
                learning_rate: 1e-5,
                epochs: 1000,
                batch_size: 8,
            }),
            svc: Some(SvcParams {
                c: 0.002,
                class_weight: 2.0,
            }),
        };
        assert_eq!(p.to_string(), "width=128;lr=1e-5;epochs=1000;batch=8;C=0.002;class_weight=2");
    }
}
