//! Fitting and prediction for every model family the protocols compare.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::Config;
use super::grid::{Family, HyperParams, NetParams, SvcParams};
use crate::augment::{sample_lambda, LabeledSample, MixPolicy};
use crate::classify::{
    knn_predict, pca_fit, pca_transform, svc_predict, train_linear_svc_with_budget,
    LinearSvcModel, PcaModel, RmsScaler,
};
use crate::embedder::{train_embedder, train_ffnn_baseline, MlpModel, TrainConfig};
use crate::seed::{derive_seed, derived_rng};
use crate::signals::{featurize, AnalyteMix, FeatureVector, Split, Trial};
use crate::targets::{mixture_target, TargetSpace, TargetVector};
use crate::{Error, Result};

/// A featurized trial with the metadata the harness needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub features: FeatureVector,
    pub mix: AnalyteMix,
    pub split: Split,
}

pub fn featurize_trials(trials: &[Trial], pre_onset_s: f64, window_s: f64) -> Result<Vec<Sample>> {
    trials
        .iter()
        .map(|t| {
            Ok(Sample {
                id: t.id.clone(),
                features: featurize(&t.trace, t.onset_s, pre_onset_s, window_s, &t.id)?,
                mix: t.mix.clone(),
                split: t.split,
            })
        })
        .collect()
}

/// Everything a fit needs besides data and hyperparameters.
#[derive(Debug, Clone)]
pub struct Context {
    pub space: Option<TargetSpace>,
    /// Factor applied to regression targets during embedder training.
    pub target_scale: f64,
    pub target_analyte: String,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub mix_probability: f64,
    pub augment_baselines: bool,
    pub n_hidden_layers: usize,
    pub optimizer: crate::embedder::Optimizer,
    pub knn_k: usize,
    pub svc_iterations: usize,
    pub head_mixes: Option<usize>,
    pub standardize: bool,
}

impl Context {
    pub fn from_config(config: &Config, space: Option<TargetSpace>) -> Self {
        let target_scale = match (&space, config.targets.unit_rms_training) {
            (Some(s), true) => (s.dimension() as f64).sqrt(),
            _ => 1.0,
        };
        Self {
            space,
            target_scale,
            target_analyte: config.classify.target_analyte.clone(),
            lambda_min: config.augment.lambda_min,
            lambda_max: config.augment.lambda_max,
            mix_probability: config.augment.mix_probability,
            augment_baselines: config.augment.augment_baselines,
            n_hidden_layers: config.embedder.n_hidden_layers,
            optimizer: config.embedder.optimizer,
            knn_k: config.classify.knn_k,
            svc_iterations: config.classify.svc_iterations,
            head_mixes: config.classify.head_mixes,
            standardize: config.classify.standardize,
        }
    }

    fn policy(&self, seed: u64, enabled: bool) -> MixPolicy {
        MixPolicy {
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            mix_probability: if enabled { self.mix_probability } else { 0.0 },
            seed,
        }
    }

    fn train_config(&self, net: &NetParams, seed: u64) -> TrainConfig {
        TrainConfig {
            width: net.width,
            learning_rate: net.learning_rate,
            epochs: net.epochs,
            batch_size: net.batch_size,
            n_hidden_layers: self.n_hidden_layers,
            optimizer: self.optimizer,
            seed,
        }
    }

    pub fn label(&self, mix: &AnalyteMix) -> bool {
        mix.label_positive(&self.target_analyte)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadKind {
    Svc,
    Knn,
    PcaSvc,
}

/// Downstream classifier over a fixed representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Head {
    Svc {
        scaler: Option<RmsScaler>,
        model: LinearSvcModel,
    },
    Knn {
        points: Vec<Vec<f64>>,
        labels: Vec<bool>,
        k: usize,
    },
    PcaSvc {
        pca: PcaModel,
        scaler: Option<RmsScaler>,
        model: LinearSvcModel,
    },
}

impl Head {
    fn predict(&self, x: &[f64]) -> Result<bool> {
        match self {
            Head::Svc { scaler, model } => match scaler {
                Some(s) => svc_predict(model, &s.transform(x)),
                None => svc_predict(model, x),
            },
            Head::Knn { points, labels, k } => knn_predict(points, labels, x, *k),
            Head::PcaSvc { pca, scaler, model } => {
                let z = pca_transform(pca, x)?;
                match scaler {
                    Some(s) => svc_predict(model, &s.transform(&z)),
                    None => svc_predict(model, &z),
                }
            }
        }
    }
}

/// A trained model from any family.
#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Embedded { embedder: MlpModel, head: Head },
    Ffnn(MlpModel),
    Raw(Head),
}

fn stack(xs: &[&FeatureVector]) -> Result<Array2<f64>> {
    let d = xs.first().map_or(0, |x| x.len());
    let mut flat = Vec::with_capacity(xs.len() * d);
    for x in xs {
        if x.len() != d {
            return Err(Error::Dimension("ragged feature vectors".into()));
        }
        flat.extend_from_slice(&x.values);
    }
    Array2::from_shape_vec((xs.len(), d), flat).map_err(|e| Error::Dimension(e.to_string()))
}

fn embed_all(model: &MlpModel, xs: &[&FeatureVector]) -> Result<Vec<Vec<f64>>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let out = model.forward_batch(stack(xs)?.view())?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite embedding".into()));
    }
    Ok(out.rows().into_iter().map(|r| r.to_vec()).collect())
}

impl Fitted {
    pub fn predict(&self, xs: &[&FeatureVector]) -> Result<Vec<bool>> {
        match self {
            Fitted::Embedded { embedder, head } => embed_all(embedder, xs)?
                .iter()
                .map(|z| head.predict(z))
                .collect(),
            Fitted::Ffnn(model) => {
                if xs.is_empty() {
                    return Ok(Vec::new());
                }
                let out = model.forward_batch(stack(xs)?.view())?;
                Ok(out.column(0).iter().map(|&v| v > 0.0).collect())
            }
            Fitted::Raw(head) => xs.iter().map(|x| head.predict(&x.values)).collect(),
        }
    }

    pub fn embedder(&self) -> Option<&MlpModel> {
        match self {
            Fitted::Embedded { embedder, .. } => Some(embedder),
            _ => None,
        }
    }
}

fn labeled(samples: &[Sample], ctx: &Context, with_targets: bool) -> Result<Vec<LabeledSample>> {
    samples
        .iter()
        .map(|s| {
            let target = match (&ctx.space, with_targets) {
                (Some(space), true) => {
                    let mut t = mixture_target(space, &s.mix)?;
                    t.values.iter_mut().for_each(|v| *v *= ctx.target_scale);
                    t
                }
                (None, true) => {
                    return Err(Error::Config("embedder training needs a target space".into()))
                }
                (_, false) => TargetVector { values: Vec::new() },
            };
            Ok(LabeledSample {
                features: s.features.clone(),
                target,
                positive: ctx.label(&s.mix),
            })
        })
        .collect()
}

/// Seeded blends `(i, j, lambda)` of training pairs with different analyte
/// content, used to add synthetic mixtures to a head's training set.
fn mix_plan(samples: &[Sample], ctx: &Context, seed: u64, enabled: bool) -> Vec<(usize, usize, f64)> {
    let n_mixes = if enabled && ctx.mix_probability > 0.0 {
        ctx.head_mixes.unwrap_or(samples.len())
    } else {
        0
    };
    let policy = ctx.policy(seed, true);
    let mut rng = derived_rng(seed, "head-mixes");
    let n = samples.len();
    let mut plan = Vec::with_capacity(n_mixes);
    let mut attempts = 0;
    while plan.len() < n_mixes && attempts < 100 * n_mixes {
        attempts += 1;
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if samples[i].mix.components()[0].0 == samples[j].mix.components()[0].0 {
            continue;
        }
        plan.push((i, j, sample_lambda(&policy, &mut rng)));
    }
    plan
}

/// Points plus their planned blends; a blend is positive when either
/// constituent is.
fn with_mixes(
    points: Vec<Vec<f64>>,
    labels: Vec<bool>,
    plan: &[(usize, usize, f64)],
) -> (Vec<Vec<f64>>, Vec<bool>) {
    let (mut xs, mut ys) = (points, labels);
    for &(i, j, lambda) in plan {
        let blended = xs[i]
            .iter()
            .zip(&xs[j])
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        xs.push(blended);
        ys.push(ys[i] || ys[j]);
    }
    (xs, ys)
}

fn fit_svc(
    xs: Vec<Vec<f64>>,
    ys: &[bool],
    svc: &SvcParams,
    ctx: &Context,
    standardize: bool,
    seed: u64,
) -> Result<(Option<RmsScaler>, LinearSvcModel)> {
    let scaler = standardize.then(|| RmsScaler::fit(&xs));
    let xs = match &scaler {
        Some(s) => s.transform_all(&xs),
        None => xs,
    };
    let model = train_linear_svc_with_budget(
        &xs,
        ys,
        svc.c,
        svc.class_weight,
        derive_seed(seed, "svc"),
        ctx.svc_iterations,
    )?;
    Ok((scaler, model))
}

fn fit_head(
    kind: HeadKind,
    xs: Vec<Vec<f64>>,
    ys: Vec<bool>,
    svc: Option<&SvcParams>,
    ctx: &Context,
    seed: u64,
) -> Result<Head> {
    let need_svc = || svc.ok_or_else(|| Error::Config("SVC head without SVC hyperparameters".into()));
    match kind {
        HeadKind::Svc => {
            let (scaler, model) = fit_svc(xs, &ys, need_svc()?, ctx, ctx.standardize, seed)?;
            Ok(Head::Svc { scaler, model })
        }
        HeadKind::Knn => {
            let k = ctx.knn_k.min(if xs.len() % 2 == 0 { xs.len() - 1 } else { xs.len() });
            Ok(Head::Knn {
                points: xs,
                labels: ys,
                k,
            })
        }
        HeadKind::PcaSvc => {
            let pca = pca_fit(&xs, 2)?;
            let projected = xs
                .iter()
                .map(|x| pca_transform(&pca, x))
                .collect::<Result<Vec<_>>>()?;
            // Principal coordinates keep the embedding's own units.
            let (scaler, model) = fit_svc(projected, &ys, need_svc()?, ctx, false, seed)?;
            Ok(Head::PcaSvc { pca, scaler, model })
        }
    }
}

fn check_training(samples: &[Sample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Data("no training samples".into()));
    }
    if let Some(s) = samples
        .iter()
        .find(|s| s.split == Split::Test || !s.mix.is_single())
    {
        return Err(Error::Hygiene(format!(
            "trial {} ({}) offered as training data; only single-analyte training trials are allowed",
            s.id, s.split
        )));
    }
    Ok(())
}

/// Train one embedder and fit every requested head on top of it.
pub fn fit_chemvise_heads(
    heads: &[HeadKind],
    params: &HyperParams,
    train: &[Sample],
    ctx: &Context,
    seed: u64,
) -> Result<Vec<Fitted>> {
    check_training(train)?;
    let net = params
        .net
        .as_ref()
        .ok_or_else(|| Error::Config("embedder needs network hyperparameters".into()))?;
    let space = ctx
        .space
        .as_ref()
        .ok_or_else(|| Error::Config("embedder training needs a target space".into()))?;
    let data = labeled(train, ctx, true)?;
    let cfg = ctx.train_config(net, derive_seed(seed, "embedder"));
    let policy = ctx.policy(derive_seed(seed, "mixup"), true);
    let (embedder, _) = train_embedder(&data, &[], space.dimension(), &cfg, &policy)?;

    let refs: Vec<&FeatureVector> = train.iter().map(|s| &s.features).collect();
    let labels = train.iter().map(|s| ctx.label(&s.mix)).collect();
    let (embedded, ys) = with_mixes(
        embed_all(&embedder, &refs)?,
        labels,
        &mix_plan(train, ctx, seed, true),
    );
    heads
        .iter()
        .map(|&kind| {
            let head = fit_head(kind, embedded.clone(), ys.clone(), params.svc.as_ref(), ctx, seed)?;
            Ok(Fitted::Embedded {
                embedder: embedder.clone(),
                head,
            })
        })
        .collect()
}

pub fn fit(
    family: Family,
    params: &HyperParams,
    train: &[Sample],
    ctx: &Context,
    seed: u64,
) -> Result<Fitted> {
    check_training(train)?;
    match family {
        Family::ChemviseSvc | Family::ChemviseKnn | Family::ChemvisePcaSvc => {
            let head = match family {
                Family::ChemviseSvc => HeadKind::Svc,
                Family::ChemviseKnn => HeadKind::Knn,
                _ => HeadKind::PcaSvc,
            };
            let mut fitted = fit_chemvise_heads(&[head], params, train, ctx, seed)?;
            Ok(fitted.remove(0))
        }
        Family::Ffnn => {
            let net = params
                .net
                .as_ref()
                .ok_or_else(|| Error::Config("FFNN needs network hyperparameters".into()))?;
            let data = labeled(train, ctx, false)?;
            let cfg = ctx.train_config(net, derive_seed(seed, "ffnn"));
            let policy = ctx.policy(derive_seed(seed, "mixup"), ctx.augment_baselines);
            let (model, _) = train_ffnn_baseline(&data, &cfg, &policy)?;
            Ok(Fitted::Ffnn(model))
        }
        Family::RawSvc => {
            let (xs, ys) = with_mixes(
                train.iter().map(|s| s.features.values.clone()).collect(),
                train.iter().map(|s| ctx.label(&s.mix)).collect(),
                &mix_plan(train, ctx, seed, ctx.augment_baselines),
            );
            Ok(Fitted::Raw(fit_head(
                HeadKind::Svc,
                xs,
                ys,
                params.svc.as_ref(),
                ctx,
                seed,
            )?))
        }
    }
}
