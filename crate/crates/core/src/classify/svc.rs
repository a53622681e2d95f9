//! Linear soft-margin SVC trained in the primal.
//!
//! Minimizes `0.5 * |w|^2 + C * sum_i omega_i * max(0, 1 - y_i (w . x_i + b))`
//! by stochastic projected subgradient steps of size `1 / t` over seeded
//! shuffled passes, returning the average of the second half of the iterates.
//! `omega_i` is `class_weight_ratio` for positives and 1 otherwise.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm};
use crate::seed::rng_from_seed;
use crate::{Error, Result};

pub const SVC_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvcModel {
    pub weight: Vec<f64>,
    pub bias: f64,
    pub c_penalty: f64,
    pub class_weight_ratio: f64,
}

pub fn train_linear_svc(
    xs: &[Vec<f64>],
    ys: &[bool],
    c_penalty: f64,
    class_weight_ratio: f64,
    seed: u64,
) -> Result<LinearSvcModel> {
    train_linear_svc_with_budget(xs, ys, c_penalty, class_weight_ratio, seed, SVC_ITERATIONS)
}

pub fn train_linear_svc_with_budget(
    xs: &[Vec<f64>],
    ys: &[bool],
    c_penalty: f64,
    class_weight_ratio: f64,
    seed: u64,
    iterations: usize,
) -> Result<LinearSvcModel> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Dimension(format!(
            "{} samples for {} labels",
            xs.len(),
            ys.len()
        )));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(Error::Dimension("ragged SVC inputs".into()));
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite SVC input".into()));
    }
    if !(c_penalty > 0.0) || !(class_weight_ratio >= 1.0) {
        return Err(Error::Config(format!(
            "SVC needs C > 0 and class weight >= 1, got C = {c_penalty}, weight = {class_weight_ratio}"
        )));
    }
    let n_pos = ys.iter().filter(|y| **y).count();
    if n_pos == 0 || n_pos == ys.len() {
        return Err(Error::Degenerate(
            "SVC training data holds a single class".into(),
        ));
    }

    let n = xs.len() as f64;
    let omega = |positive: bool| if positive { class_weight_ratio } else { 1.0 };
    let total_weight: f64 = ys.iter().map(|&y| omega(y)).sum();
    // The optimum satisfies 0.5 |w|^2 <= J(0, 0) = C * sum(omega).
    let w_radius = (2.0 * c_penalty * total_weight).sqrt();
    let x_radius = xs.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let b_radius = 1.0 + w_radius * x_radius;

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; dim];
    let mut b_avg = 0.0;
    let average_from = iterations / 2;
    let mut averaged = 0usize;

    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut cursor = order.len();
    for t in 1..=iterations {
        if cursor == order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let i = order[cursor];
        cursor += 1;

        let y = if ys[i] { 1.0 } else { -1.0 };
        let eta = 1.0 / t as f64;
        let violated = y * (dot(&w, &xs[i]) + b) < 1.0;
        let shrink = 1.0 - eta;
        w.iter_mut().for_each(|v| *v *= shrink);
        if violated {
            let step = eta * n * c_penalty * omega(ys[i]) * y;
            w.iter_mut().zip(&xs[i]).for_each(|(v, x)| *v += step * x);
            b += step;
        }
        let wn = norm(&w);
        if wn > w_radius {
            let s = w_radius / wn;
            w.iter_mut().for_each(|v| *v *= s);
        }
        b = b.clamp(-b_radius, b_radius);

        if t > average_from {
            averaged += 1;
            let k = averaged as f64;
            w_avg
                .iter_mut()
                .zip(&w)
                .for_each(|(a, v)| *a += (v - *a) / k);
            b_avg += (b - b_avg) / k;
        }
    }
    if averaged == 0 {
        w_avg = w;
        b_avg = b;
    }
    Ok(LinearSvcModel {
        weight: w_avg,
        bias: b_avg,
        c_penalty,
        class_weight_ratio,
    })
}

pub fn svc_decision(model: &LinearSvcModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.weight.len() {
        return Err(Error::Dimension(format!(
            "input has {} features, SVC expects {}",
            x.len(),
            model.weight.len()
        )));
    }
    Ok(dot(&model.weight, x) + model.bias)
}

/// `w . x + b > 0`; points on the boundary are negative.
pub fn svc_predict(model: &LinearSvcModel, x: &[f64]) -> Result<bool> {
    Ok(svc_decision(model, x)? > 0.0)
}
