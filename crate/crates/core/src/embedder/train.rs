use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::{init_mlp, loss_and_grad, Gradients, Loss, MlpModel};
use crate::augment::{augment_batch, LabeledSample, MixPolicy};
use crate::seed::{derive_seed, rng_from_seed};
use crate::signals::FeatureVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::adam()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub width: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub n_hidden_layers: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            width: 128,
            learning_rate: 1e-5,
            epochs: 1000,
            batch_size: 8,
            n_hidden_layers: 3,
            optimizer: Optimizer::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.batch_size == 0 {
            return Err(Error::Config("width and batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn layer_dims(&self, input: usize, output: usize) -> Vec<usize> {
        let mut dims = vec![input];
        dims.extend(std::iter::repeat_n(self.width, self.n_hidden_layers));
        dims.push(output);
        dims
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub epoch_losses: Vec<f64>,
    pub final_val_loss: Option<f64>,
}

enum OptimizerState {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        step: i32,
        m: Gradients,
        v: Gradients,
    },
}

fn zeros_like(model: &MlpModel) -> Gradients {
    Gradients {
        weights: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
        biases: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
    }
}

impl OptimizerState {
    fn new(optimizer: Optimizer, model: &MlpModel) -> Self {
        match optimizer {
            Optimizer::Sgd => OptimizerState::Sgd,
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => OptimizerState::Adam {
                beta1,
                beta2,
                epsilon,
                step: 0,
                m: zeros_like(model),
                v: zeros_like(model),
            },
        }
    }

    fn apply(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64) {
        match self {
            OptimizerState::Sgd => {
                for (w, g) in model.weights.iter_mut().zip(&grads.weights) {
                    w.scaled_add(-lr, g);
                }
                for (b, g) in model.biases.iter_mut().zip(&grads.biases) {
                    b.scaled_add(-lr, g);
                }
            }
            OptimizerState::Adam {
                beta1,
                beta2,
                epsilon,
                step,
                m,
                v,
            } => {
                *step += 1;
                let (b1, b2) = (*beta1, *beta2);
                let c1 = 1.0 - b1.powi(*step);
                let c2 = 1.0 - b2.powi(*step);
                // m_hat / (sqrt(v_hat) + eps) with the bias corrections folded
                // into one step size and one epsilon.
                let rate = lr * c2.sqrt() / c1;
                let eps = *epsilon * c2.sqrt();
                let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                    for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = b1 * *m + (1.0 - b1) * g;
                        *v = b2 * *v + (1.0 - b2) * g * g;
                        *p -= rate * *m / (v.sqrt() + eps);
                    }
                };
                for l in 0..model.weights.len() {
                    let gw = grads.weights[l].as_standard_layout();
                    update(
                        model.weights[l].as_slice_mut().expect("standard layout"),
                        gw.as_slice().expect("standard layout"),
                        m.weights[l].as_slice_mut().expect("standard layout"),
                        v.weights[l].as_slice_mut().expect("standard layout"),
                    );
                    update(
                        model.biases[l].as_slice_mut().expect("standard layout"),
                        &grads.biases[l].to_vec(),
                        m.biases[l].as_slice_mut().expect("standard layout"),
                        v.biases[l].as_slice_mut().expect("standard layout"),
                    );
                }
            }
        }
    }
}

fn stack(rows: impl ExactSizeIterator<Item = Vec<f64>>, width: usize) -> Result<Array2<f64>> {
    let n = rows.len();
    let flat: Vec<f64> = rows.flatten().collect();
    Array2::from_shape_vec((n, width), flat).map_err(|e| Error::Dimension(e.to_string()))
}

fn batch_matrices(batch: &[LabeledSample], loss: Loss) -> Result<(Array2<f64>, Array2<f64>)> {
    let in_dim = batch[0].features.len();
    if batch.iter().any(|s| s.features.len() != in_dim) {
        return Err(Error::Dimension("ragged feature vectors in batch".into()));
    }
    let xs = stack(batch.iter().map(|s| s.features.values.clone()), in_dim)?;
    let ys = match loss {
        Loss::MeanSquared => {
            let out = batch[0].target.len();
            if batch.iter().any(|s| s.target.len() != out) {
                return Err(Error::Dimension("ragged target vectors in batch".into()));
            }
            stack(batch.iter().map(|s| s.target.values.clone()), out)?
        }
        Loss::Logistic => stack(
            batch.iter().map(|s| vec![if s.positive { 1.0 } else { 0.0 }]),
            1,
        )?,
    };
    Ok((xs, ys))
}

/// Minibatch training shared by the embedder and the FFNN baseline.
fn fit(
    model: &mut MlpModel,
    train: &[LabeledSample],
    val: &[LabeledSample],
    cfg: &TrainConfig,
    policy: &MixPolicy,
    loss: Loss,
) -> Result<TrainHistory> {
    cfg.validate()?;
    policy.validate()?;
    let mut history = TrainHistory {
        epoch_losses: Vec::with_capacity(cfg.epochs),
        final_val_loss: None,
    };
    if cfg.epochs == 0 {
        return Ok(history);
    }
    if train.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    let mut shuffle_rng = rng_from_seed(derive_seed(cfg.seed, "shuffle"));
    let mut mix_rng = rng_from_seed(derive_seed(policy.seed, &format!("augment/{}", cfg.seed)));
    let mut state = OptimizerState::new(cfg.optimizer, model);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<LabeledSample> = chunk.iter().map(|&i| train[i].clone()).collect();
            let batch = augment_batch(&batch, policy, &mut mix_rng)?.batch;
            let (xs, ys) = batch_matrices(&batch, loss)?;
            let (value, grads) = loss_and_grad(model, xs.view(), ys.view(), loss)?;
            if !value.is_finite() {
                return Err(Error::Training {
                    epoch,
                    message: format!("loss became {value}"),
                });
            }
            state.apply(model, &grads, cfg.learning_rate);
            total += value * chunk.len() as f64;
        }
        if !model.all_finite() {
            return Err(Error::Training {
                epoch,
                message: "non-finite parameters".into(),
            });
        }
        history.epoch_losses.push(total / train.len() as f64);
    }

    if !val.is_empty() {
        let (xs, ys) = batch_matrices(val, loss)?;
        let (value, _) = loss_and_grad(model, xs.view(), ys.view(), loss)?;
        history.final_val_loss = Some(value);
    }
    Ok(history)
}

fn input_dim(train: &[LabeledSample]) -> Result<usize> {
    train
        .first()
        .map(|s| s.features.len())
        .ok_or_else(|| Error::Data("empty training set".into()))
}

/// Train the signal-to-target regressor. `train` holds single-analyte samples
/// paired with their target vectors; `policy` blends them on the fly.
pub fn train_embedder(
    train: &[LabeledSample],
    val: &[LabeledSample],
    target_dim: usize,
    cfg: &TrainConfig,
    policy: &MixPolicy,
) -> Result<(MlpModel, TrainHistory)> {
    cfg.validate()?;
    let dims = cfg.layer_dims(input_dim(train)?, target_dim);
    let mut model = init_mlp(&dims, cfg.seed)?;
    if let Some(bad) = train.iter().find(|s| s.target.len() != target_dim) {
        return Err(Error::Dimension(format!(
            "target of {} has length {}, expected {target_dim}",
            bad.features.provenance,
            bad.target.len()
        )));
    }
    let history = fit(&mut model, train, val, cfg, policy, Loss::MeanSquared)?;
    Ok((model, history))
}

/// One-logit classifier on the raw features, same architecture family.
pub fn train_ffnn_baseline(
    train: &[LabeledSample],
    cfg: &TrainConfig,
    policy: &MixPolicy,
) -> Result<(MlpModel, TrainHistory)> {
    cfg.validate()?;
    let dims = cfg.layer_dims(input_dim(train)?, 1);
    let mut model = init_mlp(&dims, cfg.seed)?;
    let history = fit(&mut model, train, &[], cfg, policy, Loss::Logistic)?;
    Ok((model, history))
}

/// Positive when the logit is strictly above zero.
pub fn ffnn_predict(model: &MlpModel, x: &FeatureVector) -> Result<bool> {
    Ok(super::forward(model, x)?.values[0] > 0.0)
}
