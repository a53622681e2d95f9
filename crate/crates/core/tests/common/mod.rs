//! Independent oracles shared by the integration and acceptance suites.
//!
//! Every check returns the worst observed deviation (or a mismatch count) so
//! callers can both assert on it and print it.

#![allow(dead_code)]

use chemvise::augment::mix_pair;
use chemvise::classify::{mcc, ConfusionCounts};
use chemvise::embedder::{init_mlp, loss_and_grad, Loss};
use chemvise::harness::count_experiments;
use chemvise::signals::{
    simulate_trial, superpose, AffinityModel, AffinityParams, AnalyteMix, ExposureSchedule,
    FeatureVector,
};
use chemvise::targets::{build_simplex, mixture_target, TargetSpace, TargetVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn analytes(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// Walks every assignment of "absent or one of k magnitudes" to n analytes
/// and counts the non-empty ones.
pub fn brute_force_count(n: u32, k: u64) -> u128 {
    let base = k + 1;
    let total = base.pow(n);
    (0..total)
        .filter(|code| {
            let mut c = *code;
            let mut present = 0;
            for _ in 0..n {
                if c % base != 0 {
                    present += 1;
                }
                c /= base;
            }
            present > 0
        })
        .count() as u128
}

/// `(n, k, formula, brute force)` for every 1 <= n <= 5, 1 <= k <= 4.
pub fn count_table() -> Vec<(u64, u64, u128, u128)> {
    let mut rows = Vec::new();
    for n in 1..=5u64 {
        for k in 1..=4u64 {
            let formula = count_experiments(n, k).expect("count fits");
            rows.push((n, k, formula, brute_force_count(n as u32, k)));
        }
    }
    rows
}

/// Largest relative gap between analytic and central-difference gradients
/// over `n_models` random small MLPs, alternating the two losses.
pub fn max_gradient_error(n_models: usize, seed: u64, h: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for m in 0..n_models {
        let depth = rng.random_range(1..=3);
        let mut dims = vec![rng.random_range(1..=5)];
        for _ in 0..depth {
            dims.push(rng.random_range(1..=6));
        }
        let loss = if m % 2 == 0 {
            Loss::MeanSquared
        } else {
            Loss::Logistic
        };
        if loss == Loss::Logistic {
            *dims.last_mut().unwrap() = 1;
        }
        let mut model = init_mlp(&dims, rng.random()).unwrap();
        // Nonzero biases so that units are not all switched on at the same point.
        let mut params = model.parameters();
        for p in params.iter_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
        model.set_parameters(&params).unwrap();

        let batch = rng.random_range(1..=4);
        let xs = Array2::from_shape_fn((batch, dims[0]), |_| rng.random_range(-1.5..1.5));
        let out = *dims.last().unwrap();
        let ys = Array2::from_shape_fn((batch, out), |_| match loss {
            Loss::MeanSquared => rng.random_range(-1.0..1.0),
            Loss::Logistic => f64::from(rng.random::<bool>()),
        });

        let (_, grads) = loss_and_grad(&model, xs.view(), ys.view(), loss).unwrap();
        let analytic = grads.flatten();
        for (p, &a) in analytic.iter().enumerate() {
            let mut probe = model.clone();
            let mut up = params.clone();
            up[p] += h;
            probe.set_parameters(&up).unwrap();
            let (lp, _) = loss_and_grad(&probe, xs.view(), ys.view(), loss).unwrap();
            let mut down = params.clone();
            down[p] -= h;
            probe.set_parameters(&down).unwrap();
            let (lm, _) = loss_and_grad(&probe, xs.view(), ys.view(), loss).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let scale = a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    worst
}

/// Spread of pairwise distances and of norms of `build_simplex(n, d)`,
/// measured directly from the vectors.
pub fn simplex_spread(n: usize, d: usize, seed: u64) -> (f64, f64) {
    let space = build_simplex(&analytes(n), d, seed).unwrap();
    let vectors: Vec<Vec<f64>> = space.iter().map(|(_, v)| v.to_vec()).collect();
    let mut dists = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d2: f64 = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    let lo = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = dists.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm_gap = vectors
        .iter()
        .map(|v| (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    (hi - lo, norm_gap)
}

fn feature(values: Vec<f64>) -> FeatureVector {
    FeatureVector {
        values,
        window_length_s: 1.0,
        provenance: "probe".into(),
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Worst deviation from the endpoint identity, the swap symmetry, and the
/// segment property of mixture targets over random draws.
pub fn mixup_defects(trials: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut endpoint, mut symmetry, mut segment) = (0.0f64, 0.0f64, 0.0f64);
    let ids = analytes(4);
    for _ in 0..trials {
        let len = rng.random_range(1..20);
        let dim = rng.random_range(1..12);
        let draw = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()
        };
        let (xi, xj) = (feature(draw(&mut rng, len)), feature(draw(&mut rng, len)));
        let yi = TargetVector::new(draw(&mut rng, dim)).unwrap();
        let yj = TargetVector::new(draw(&mut rng, dim)).unwrap();

        let (x1, y1) = mix_pair(&xi, &yi, &xj, &yj, 1.0).unwrap();
        endpoint = endpoint
            .max(max_gap(&x1.values, &xi.values))
            .max(max_gap(&y1.values, &yi.values));

        let lambda: f64 = rng.random_range(0.0..=1.0);
        let (xa, ya) = mix_pair(&xi, &yi, &xj, &yj, lambda).unwrap();
        let (xb, yb) = mix_pair(&xj, &yj, &xi, &yi, 1.0 - lambda).unwrap();
        symmetry = symmetry
            .max(max_gap(&xa.values, &xb.values))
            .max(max_gap(&ya.values, &yb.values));

        let space = TargetSpace::new(
            chemvise::targets::TargetKind::Semantic,
            dim,
            ids.iter().map(|id| (id.clone(), draw(&mut rng, dim))).collect(),
        )
        .unwrap();
        let a = rng.random_range(0..4);
        let b = (a + rng.random_range(1..4)) % 4;
        let (ca, cb) = (rng.random_range(0.05..=1.0), rng.random_range(0.05..=1.0));
        let mix = AnalyteMix::double(&ids[a], ca, &ids[b], cb).unwrap();
        let target = mixture_target(&space, &mix).unwrap();
        // On the segment: target = ya + t (yb - ya) with the same t in every
        // coordinate, and 0 <= t <= 1.
        let ya = space.get(&ids[a]).unwrap();
        let yb = space.get(&ids[b]).unwrap();
        let t = cb / (ca + cb);
        let on_segment: Vec<f64> = ya.iter().zip(yb).map(|(p, q)| p + t * (q - p)).collect();
        segment = segment.max(max_gap(&target.values, &on_segment));
        if !(0.0..=1.0).contains(&t) {
            segment = f64::INFINITY;
        }
    }
    (endpoint, symmetry, segment)
}

/// Worst elementwise gap between a simulated double and the superposition of
/// its two simulated singles, over every analyte pair of a noiseless,
/// interference-free model.
pub fn additivity_gap(sample_rate_hz: f64) -> f64 {
    let ids = analytes(4);
    let params = AffinityParams {
        interference_gamma: 0.0,
        noise_sigma: 0.0,
        ..AffinityParams::default()
    };
    let model = AffinityModel::generate(&ids, &params).unwrap();
    let schedule = ExposureSchedule::default();
    let mut worst = 0.0f64;
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let (ci, cj) = (0.2, 0.15);
            let single = |id: &str, c: f64| {
                simulate_trial(&AnalyteMix::single(id, c).unwrap(), &model, &schedule, sample_rate_hz, 1)
                    .unwrap()
            };
            let double = simulate_trial(
                &AnalyteMix::double(&ids[i], ci, &ids[j], cj).unwrap(),
                &model,
                &schedule,
                sample_rate_hz,
                1,
            )
            .unwrap();
            let sum = superpose(&single(&ids[i], ci), &single(&ids[j], cj)).unwrap();
            let gap = double
                .values()
                .iter()
                .zip(sum.values().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(gap);
        }
    }
    worst
}

/// MCC straight from the definition, with the product under a single root.
pub fn mcc_oracle(tp: u64, fp: u64, tn: u64, fn_: u64) -> f64 {
    let product = (tp + fp) as u128 * (tp + fn_) as u128 * (tn + fp) as u128 * (tn + fn_) as u128;
    if product == 0 {
        return 0.0;
    }
    let numerator = tp as f64 * tn as f64 - fp as f64 * fn_ as f64;
    numerator / (product as f64).sqrt()
}

/// Worst gap between the library MCC and the oracle over random confusion
/// matrices; every fourth matrix has a zeroed cell pair forcing a zero factor.
pub fn mcc_max_gap(n: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut degenerate = 0;
    for i in 0..n {
        let mut cells: [u64; 4] = [(); 4].map(|_| rng.random_range(0..60));
        if i % 4 == 0 {
            // Empty one marginal: (tp, fp), (tp, fn), (tn, fp) or (tn, fn).
            let pairs = [(0, 1), (0, 3), (2, 1), (2, 3)];
            let (a, b) = pairs[rng.random_range(0..4)];
            cells[a] = 0;
            cells[b] = 0;
        }
        let [tp, fp, tn, fn_] = cells;
        let expected = mcc_oracle(tp, fp, tn, fn_);
        if expected == 0.0 && (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_) == 0 {
            degenerate += 1;
        }
        let got = mcc(&ConfusionCounts { tp, fp, tn, r#fn: fn_ });
        worst = worst.max((got - expected).abs());
    }
    (worst, degenerate)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

/// Type-7 median of a sample.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
