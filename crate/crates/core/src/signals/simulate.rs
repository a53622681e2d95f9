//! First-order adsorption/desorption kinetics with optional pairwise interference.
//!
//! For channel `s` and analyte `a` at concentration `c_a`:
//!
//! ```text
//! rise_a(t) = 0                                      t < onset
//!           = 1 - exp(-(t - onset) / tau_rise_a)     onset <= t < end
//!           = rise_a(end) * exp(-(t - end) / tau_decay_a)   t >= end
//!
//! value_s(t) = baseline_s + saturate(sum_a c_a * k[s,a] * rise_a(t))
//!            + gamma * prod_a c_a * k[s,a] * rise_a(t)     (doubles only)
//!            + N(0, noise_sigma)
//! ```

use ndarray::{Array2, Zip};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AnalyteMix, ExposureSchedule, SensorTrace};
use crate::seed::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Saturation {
    #[default]
    Identity,
    /// `scale * tanh(x / scale)` soft clip.
    Tanh { scale: f64 },
}

impl Saturation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Saturation::Identity => x,
            Saturation::Tanh { scale } => scale * (x / scale).tanh(),
        }
    }
}

/// Ranges used to draw a random [`AffinityModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AffinityParams {
    pub n_sensors: usize,
    /// Magnitude range of the response gains.
    pub affinity_range: (f64, f64),
    /// Probability that a gain is negative (resistance drops on exposure).
    pub negative_fraction: f64,
    pub baseline_range: (f64, f64),
    pub tau_rise_range_s: (f64, f64),
    pub tau_decay_range_s: (f64, f64),
    pub interference_gamma: f64,
    pub noise_sigma: f64,
    pub saturation: Saturation,
    pub seed: u64,
}

impl Default for AffinityParams {
    fn default() -> Self {
        Self {
            n_sensors: super::DEFAULT_SENSORS,
            affinity_range: (1.0, 6.0),
            negative_fraction: 0.5,
            baseline_range: (1.0, 3.0),
            tau_rise_range_s: (0.3, 3.0),
            tau_decay_range_s: (0.8, 2.5),
            interference_gamma: 0.25,
            noise_sigma: 0.05,
            saturation: Saturation::Identity,
            seed: 20_230_501,
        }
    }
}

/// Per-sensor response gains and per-analyte kinetics.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityModel {
    pub analytes: Vec<String>,
    /// `[sensors x analytes]` response gain per unit concentration.
    pub affinities: Array2<f64>,
    pub baselines: Vec<f64>,
    pub tau_rise_s: Vec<f64>,
    pub tau_decay_s: Vec<f64>,
    pub interference_gamma: f64,
    pub noise_sigma: f64,
    pub saturation: Saturation,
    pub seed: u64,
}

fn draw_in<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64), positive: bool) -> Result<()> {
    let ok = lo.is_finite() && hi.is_finite() && lo <= hi && (!positive || lo > 0.0);
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("invalid {name} range ({lo}, {hi})")))
    }
}

impl AffinityModel {
    /// Draw a model for `analytes` from the ranges in `params`.
    ///
    /// Rise constants are drawn log-uniformly so that fast and slow analytes are
    /// equally represented.
    pub fn generate(analytes: &[String], params: &AffinityParams) -> Result<Self> {
        if analytes.is_empty() {
            return Err(Error::Config("no analytes configured".into()));
        }
        if params.n_sensors == 0 {
            return Err(Error::Config("sensor count must be positive".into()));
        }
        check_range("affinity", params.affinity_range, false)?;
        if !(0.0..=1.0).contains(&params.negative_fraction) {
            return Err(Error::Config(format!(
                "negative_fraction must lie in [0, 1], got {}",
                params.negative_fraction
            )));
        }
        check_range("baseline", params.baseline_range, false)?;
        check_range("tau_rise", params.tau_rise_range_s, true)?;
        check_range("tau_decay", params.tau_decay_range_s, true)?;

        let mut rng = rng_from_seed(params.seed);
        let n = analytes.len();
        let s = params.n_sensors;
        let affinities = Array2::from_shape_fn((s, n), |_| {
            let magnitude = draw_in(&mut rng, params.affinity_range);
            if rng.random::<f64>() < params.negative_fraction {
                -magnitude
            } else {
                magnitude
            }
        });
        let baselines = (0..s)
            .map(|_| draw_in(&mut rng, params.baseline_range))
            .collect();
        let log_uniform = |rng: &mut rand_chacha::ChaCha8Rng, (lo, hi): (f64, f64)| {
            draw_in(rng, (lo.ln(), hi.ln())).exp()
        };
        let tau_rise_s = (0..n)
            .map(|_| log_uniform(&mut rng, params.tau_rise_range_s))
            .collect();
        let tau_decay_s = (0..n)
            .map(|_| log_uniform(&mut rng, params.tau_decay_range_s))
            .collect();

        let model = Self {
            analytes: analytes.to_vec(),
            affinities,
            baselines,
            tau_rise_s,
            tau_decay_s,
            interference_gamma: params.interference_gamma,
            noise_sigma: params.noise_sigma,
            saturation: params.saturation,
            seed: params.seed,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.analytes.len();
        let (s, na) = self.affinities.dim();
        if na != n || self.tau_rise_s.len() != n || self.tau_decay_s.len() != n {
            return Err(Error::Config(format!(
                "affinity model lists {n} analytes but has {na} affinity columns, {} rise and {} decay constants",
                self.tau_rise_s.len(),
                self.tau_decay_s.len()
            )));
        }
        if self.baselines.len() != s || s == 0 {
            return Err(Error::Config(format!(
                "{} baselines for {s} sensors",
                self.baselines.len()
            )));
        }
        if self
            .tau_rise_s
            .iter()
            .chain(&self.tau_decay_s)
            .any(|t| !(*t > 0.0) || !t.is_finite())
        {
            return Err(Error::Config("kinetics constants must be positive".into()));
        }
        if !(self.interference_gamma >= 0.0) || !(self.noise_sigma >= 0.0) {
            return Err(Error::Config(
                "interference gamma and noise sigma must be non-negative".into(),
            ));
        }
        if let Saturation::Tanh { scale } = self.saturation {
            if !(scale > 0.0) {
                return Err(Error::Config("tanh saturation scale must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn n_sensors(&self) -> usize {
        self.affinities.nrows()
    }

    pub fn analyte_index(&self, id: &str) -> Result<usize> {
        self.analytes
            .iter()
            .position(|a| a == id)
            .ok_or_else(|| Error::Lookup(id.to_string()))
    }
}

fn rise(t: f64, schedule: &ExposureSchedule, tau_rise: f64, tau_decay: f64) -> f64 {
    let onset = schedule.onset_s();
    let end = schedule.exposure_end_s();
    if t < onset {
        0.0
    } else if t < end {
        1.0 - (-(t - onset) / tau_rise).exp()
    } else {
        let peak = 1.0 - (-(end - onset) / tau_rise).exp();
        peak * (-(t - end) / tau_decay).exp()
    }
}

/// Simulate one exposure covering the whole schedule, starting at `t = 0`.
pub fn simulate_trial(
    mix: &AnalyteMix,
    model: &AffinityModel,
    schedule: &ExposureSchedule,
    sample_rate_hz: f64,
    rng_seed: u64,
) -> Result<SensorTrace> {
    schedule.validate()?;
    model.validate()?;
    if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
        return Err(Error::Config(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let components = mix
        .components()
        .iter()
        .map(|(id, c)| Ok((model.analyte_index(id)?, *c)))
        .collect::<Result<Vec<_>>>()?;

    let n_samples = ((schedule.total_s() * sample_rate_hz).round() as usize).max(1);
    let n_sensors = model.n_sensors();
    let mut values = Array2::<f64>::zeros((n_samples, n_sensors));
    let mut rises = vec![0.0; components.len()];
    for (i, mut row) in values.outer_iter_mut().enumerate() {
        let t = i as f64 / sample_rate_hz;
        for (r, &(a, _)) in rises.iter_mut().zip(&components) {
            *r = rise(t, schedule, model.tau_rise_s[a], model.tau_decay_s[a]);
        }
        for (s, v) in row.iter_mut().enumerate() {
            let mut linear = 0.0;
            let mut product = 1.0;
            for (&r, &(a, c)) in rises.iter().zip(&components) {
                let term = c * model.affinities[[s, a]] * r;
                linear += term;
                product *= term;
            }
            let interference = if components.len() == 2 {
                model.interference_gamma * product
            } else {
                0.0
            };
            *v = model.baselines[s] + model.saturation.apply(linear) + interference;
        }
    }

    if model.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, model.noise_sigma)
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        let mut rng = rng_from_seed(rng_seed);
        values.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    }

    SensorTrace::new(
        sample_rate_hz,
        0.0,
        values,
        SensorTrace::default_channel_names(n_sensors),
    )
}

/// Elementwise sum of two traces minus the channelwise baseline of `b`, taken
/// as `b`'s first sample, so a shared baseline is not counted twice.
pub fn superpose(a: &SensorTrace, b: &SensorTrace) -> Result<SensorTrace> {
    if a.values().dim() != b.values().dim() {
        return Err(Error::Dimension(format!(
            "cannot superpose traces of shape {:?} and {:?}",
            a.values().dim(),
            b.values().dim()
        )));
    }
    if a.sample_rate_hz() != b.sample_rate_hz() {
        return Err(Error::Dimension(format!(
            "sample rates differ: {} vs {}",
            a.sample_rate_hz(),
            b.sample_rate_hz()
        )));
    }
    let baseline = b.values().row(0).to_owned();
    let mut out = a.values().clone();
    Zip::from(out.rows_mut())
        .and(b.values().rows())
        .for_each(|mut o, rb| {
            for ((ov, &bv), &base) in o.iter_mut().zip(rb).zip(&baseline) {
                *ov = *ov + bv - base;
            }
        });
    Ok(a.with_values(out))
}
