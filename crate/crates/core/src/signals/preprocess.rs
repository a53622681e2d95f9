use log::warn;
use ndarray::{s, Axis};

use super::{FeatureVector, SensorTrace};
use crate::{Error, Result};

/// Channels with a standard deviation below this are treated as constant.
pub const CONSTANT_CHANNEL_STD: f64 = 1e-12;

/// A z-scored trace plus the names of channels that were constant and mapped to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScored {
    pub trace: SensorTrace,
    pub constant_channels: Vec<String>,
}

/// Center and scale every channel by its own mean and population standard deviation.
pub fn zscore(trace: &SensorTrace) -> Result<ZScored> {
    if trace.n_samples() < 2 {
        return Err(Error::Range(format!(
            "z-scoring needs at least 2 samples, got {}",
            trace.n_samples()
        )));
    }
    let mut values = trace.values().clone();
    let n = values.nrows() as f64;
    let mut constant_channels = Vec::new();
    for (mut column, name) in values.axis_iter_mut(Axis(1)).zip(trace.channel_names()) {
        let mean = column.sum() / n;
        let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std < CONSTANT_CHANNEL_STD {
            warn!("channel {name} is constant; z-scored to zeros");
            constant_channels.push(name.clone());
            column.fill(0.0);
        } else {
            column.mapv_inplace(|v| (v - mean) / std);
        }
    }
    Ok(ZScored {
        trace: trace.with_values(values),
        constant_channels,
    })
}

fn window_bounds(
    trace: &SensorTrace,
    onset_s: f64,
    pre_onset_s: f64,
    length_s: f64,
) -> Result<(usize, usize)> {
    if !(pre_onset_s >= 0.0) || !(length_s > pre_onset_s) || !length_s.is_finite() {
        return Err(Error::Range(format!(
            "window needs length > pre-onset >= 0, got length {length_s} s, pre-onset {pre_onset_s} s"
        )));
    }
    let fs = trace.sample_rate_hz();
    let start = ((onset_s - pre_onset_s - trace.t0_s()) * fs).round();
    let len = (length_s * fs).round();
    if start < 0.0 || len < 1.0 || start + len > trace.n_samples() as f64 {
        return Err(Error::Range(format!(
            "window [{:.4}, {:.4}] s lies outside the trace [{:.4}, {:.4}] s",
            onset_s - pre_onset_s,
            onset_s - pre_onset_s + length_s,
            trace.t0_s(),
            trace.t0_s() + trace.duration_s()
        )));
    }
    Ok((start as usize, len as usize))
}

/// Sub-trace starting `pre_onset_s` before the onset and spanning `length_s`.
pub fn slice_window(
    trace: &SensorTrace,
    onset_s: f64,
    pre_onset_s: f64,
    length_s: f64,
) -> Result<SensorTrace> {
    let (start, len) = window_bounds(trace, onset_s, pre_onset_s, length_s)?;
    let values = trace.values().slice(s![start..start + len, ..]).to_owned();
    SensorTrace::new(
        trace.sample_rate_hz(),
        trace.time_at(start),
        values,
        trace.channel_names().to_vec(),
    )
}

/// Flatten a window in time-major order: all channels at step 0, then step 1, ...
pub fn extract_window(
    trace: &SensorTrace,
    onset_s: f64,
    pre_onset_s: f64,
    length_s: f64,
) -> Result<FeatureVector> {
    let window = slice_window(trace, onset_s, pre_onset_s, length_s)?;
    Ok(FeatureVector {
        values: window.values().iter().copied().collect(),
        window_length_s: length_s,
        provenance: String::new(),
    })
}

/// Window, then z-score the window per channel, then flatten.
pub fn featurize(
    trace: &SensorTrace,
    onset_s: f64,
    pre_onset_s: f64,
    length_s: f64,
    provenance: &str,
) -> Result<FeatureVector> {
    let window = slice_window(trace, onset_s, pre_onset_s, length_s)?;
    let scored = zscore(&window)?;
    Ok(FeatureVector {
        values: scored.trace.values().iter().copied().collect(),
        window_length_s: length_s,
        provenance: provenance.to_string(),
    })
}
