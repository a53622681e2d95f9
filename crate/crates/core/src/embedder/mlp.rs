use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seed::rng_from_seed;
use crate::signals::FeatureVector;
use crate::targets::TargetVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Mean over batch and output dimensions of the squared residual.
    MeanSquared,
    /// Sigmoid cross-entropy on a single logit; targets are 0 or 1.
    Logistic,
}

/// Dense layers with rectifiers between them and a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    /// Layer `l` maps `layer_dims[l]` to `layer_dims[l + 1]`; shape `[out x in]`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub activation: Activation,
    pub init_seed: u64,
}

/// Parameter-shaped gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }
}

/// He-style initialization: weights `N(0, 2 / fan_in)`, biases zero.
pub fn init_mlp(layer_dims: &[usize], seed: u64) -> Result<MlpModel> {
    if layer_dims.len() < 2 {
        return Err(Error::Config(format!(
            "an MLP needs at least input and output layers, got {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(Error::Config(format!("zero-width layer in {layer_dims:?}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut weights = Vec::with_capacity(layer_dims.len() - 1);
    let mut biases = Vec::with_capacity(layer_dims.len() - 1);
    for pair in layer_dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt())
            .map_err(|e| Error::Config(e.to_string()))?;
        weights.push(Array2::from_shape_fn((fan_out, fan_in), |_| {
            normal.sample(&mut rng)
        }));
        biases.push(Array1::zeros(fan_out));
    }
    Ok(MlpModel {
        layer_dims: layer_dims.to_vec(),
        weights,
        biases,
        activation: Activation::Relu,
        init_seed: seed,
    })
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("at least two layers")
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn n_parameters(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.len() + b.len())
            .sum()
    }

    /// Parameters in layer order, each layer's weights (row-major) then biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters() {
            return Err(Error::Dimension(format!(
                "{} parameters given, model has {}",
                params.len(),
                self.n_parameters()
            )));
        }
        let mut it = params.iter();
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            w.iter_mut().chain(b.iter_mut()).for_each(|p| *p = *it.next().unwrap());
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.weights
            .iter()
            .all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {cols} features, model expects {}",
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Batched forward pass; rows of `xs` are samples.
    pub fn forward_batch(&self, xs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(xs.ncols())?;
        let mut h = xs.to_owned();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = h.dot(&w.t());
            z += b;
            if l + 1 < self.n_layers() {
                z.mapv_inplace(relu);
            }
            h = z;
        }
        Ok(h)
    }

    /// Keeps pre-activations for the backward pass.
    fn forward_cached(&self, xs: ArrayView2<f64>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
        let mut activations = vec![xs.to_owned()];
        let mut pre = Vec::with_capacity(self.n_layers());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = activations[l].dot(&w.t());
            z += b;
            let a = if l + 1 < self.n_layers() {
                z.mapv(relu)
            } else {
                z.clone()
            };
            pre.push(z);
            activations.push(a);
        }
        (pre, activations)
    }
}

fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn forward(model: &MlpModel, x: &FeatureVector) -> Result<TargetVector> {
    let xs = ArrayView2::from_shape((1, x.len()), &x.values)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let out = model.forward_batch(xs)?;
    TargetVector::new(out.into_raw_vec_and_offset().0)
}

/// The trained embedder's view of a sample; identical to [`forward`].
pub fn embed(model: &MlpModel, x: &FeatureVector) -> Result<TargetVector> {
    forward(model, x)
}

/// Loss over a batch and its exact gradient by reverse accumulation.
pub fn loss_and_grad(
    model: &MlpModel,
    xs: ArrayView2<f64>,
    ys: ArrayView2<f64>,
    loss: Loss,
) -> Result<(f64, Gradients)> {
    model.check_input(xs.ncols())?;
    let batch = xs.nrows();
    if batch == 0 {
        return Err(Error::Dimension("empty batch".into()));
    }
    if ys.nrows() != batch || ys.ncols() != model.output_dim() {
        return Err(Error::Dimension(format!(
            "targets have shape {:?}, expected [{batch} x {}]",
            ys.dim(),
            model.output_dim()
        )));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in batch".into()));
    }

    let (pre, activations) = model.forward_cached(xs);
    let output = activations.last().expect("output layer");
    let (value, mut delta) = match loss {
        Loss::MeanSquared => {
            let scale = 1.0 / (batch * model.output_dim()) as f64;
            let residual = output - &ys;
            let value = residual.iter().map(|r| r * r).sum::<f64>() * scale;
            (value, residual * (2.0 * scale))
        }
        Loss::Logistic => {
            if model.output_dim() != 1 {
                return Err(Error::Dimension(
                    "logistic loss needs a single output".into(),
                ));
            }
            let scale = 1.0 / batch as f64;
            let mut value = 0.0;
            let mut delta = Array2::zeros((batch, 1));
            for i in 0..batch {
                let (z, y) = (output[[i, 0]], ys[[i, 0]]);
                value += softplus(z) - y * z;
                delta[[i, 0]] = (sigmoid(z) - y) * scale;
            }
            (value * scale, delta)
        }
    };

    let n = model.n_layers();
    let mut gw = vec![Array2::zeros((0, 0)); n];
    let mut gb = vec![Array1::zeros(0); n];
    for l in (0..n).rev() {
        gw[l] = delta.t().dot(&activations[l]);
        gb[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut back = delta.dot(&model.weights[l]);
            back.zip_mut_with(&pre[l - 1], |d, &z| {
                if z <= 0.0 {
                    *d = 0.0
                }
            });
            delta = back;
        }
    }
    Ok((
        value,
        Gradients {
            weights: gw,
            biases: gb,
        },
    ))
}
