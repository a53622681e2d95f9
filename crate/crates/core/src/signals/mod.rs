//! Synthetic chemiresistive exposures: trial types, the kinetics simulator,
//! preprocessing, and the on-disk dataset layout.

mod dataset;
mod preprocess;
mod simulate;

pub use dataset::{
    read_signal_csv, write_signal_csv, DatasetDesign, Split, Trial, TrialDataset, TrialRecord,
};
pub(crate) use dataset::signal_csv_text;
pub use preprocess::{extract_window, featurize, slice_window, zscore, ZScored};
pub use simulate::{simulate_trial, superpose, AffinityModel, AffinityParams, Saturation};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default number of sensors in the array.
pub const DEFAULT_SENSORS: usize = 8;

/// Time × channel matrix of sensor resistances.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    sample_rate_hz: f64,
    t0_s: f64,
    values: Array2<f64>,
    channel_names: Vec<String>,
}

impl SensorTrace {
    pub fn new(
        sample_rate_hz: f64,
        t0_s: f64,
        values: Array2<f64>,
        channel_names: Vec<String>,
    ) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let (t, s) = values.dim();
        if t == 0 || s == 0 {
            return Err(Error::Dimension(format!("empty trace of shape [{t} x {s}]")));
        }
        if channel_names.len() != s {
            return Err(Error::Dimension(format!(
                "{} channel names for {s} channels",
                channel_names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("trace contains non-finite values".into()));
        }
        Ok(Self {
            sample_rate_hz,
            t0_s,
            values,
            channel_names,
        })
    }

    /// Channel names `s0..s{n-1}`.
    pub fn default_channel_names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn t0_s(&self) -> f64 {
        self.t0_s
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.values.ncols()
    }

    /// Covered duration, `T / sample_rate`.
    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate_hz
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.t0_s + index as f64 / self.sample_rate_hz
    }

    pub(crate) fn with_values(&self, values: Array2<f64>) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            t0_s: self.t0_s,
            values,
            channel_names: self.channel_names.clone(),
        }
    }
}

/// One or two (analyte, concentration) components of an exposure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyteMix {
    components: Vec<(String, f64)>,
}

impl AnalyteMix {
    pub fn new(components: Vec<(String, f64)>) -> Result<Self> {
        if components.is_empty() || components.len() > 2 {
            return Err(Error::Config(format!(
                "a mix holds one or two analytes, got {}",
                components.len()
            )));
        }
        for (id, c) in &components {
            if !(*c > 0.0 && *c <= 1.0) {
                return Err(Error::Config(format!(
                    "concentration of `{id}` must lie in (0, 1], got {c}"
                )));
            }
        }
        if components.len() == 2 && components[0].0 == components[1].0 {
            return Err(Error::Config(format!(
                "analyte `{}` listed twice in one mix",
                components[0].0
            )));
        }
        Ok(Self { components })
    }

    pub fn single(analyte: &str, concentration: f64) -> Result<Self> {
        Self::new(vec![(analyte.to_string(), concentration)])
    }

    pub fn double(a: &str, conc_a: f64, b: &str, conc_b: f64) -> Result<Self> {
        Self::new(vec![(a.to_string(), conc_a), (b.to_string(), conc_b)])
    }

    pub fn components(&self) -> &[(String, f64)] {
        &self.components
    }

    pub fn is_single(&self) -> bool {
        self.components.len() == 1
    }

    pub fn contains(&self, analyte: &str) -> bool {
        self.components.iter().any(|(id, _)| id == analyte)
    }

    /// Binary label: any amount of the target analyte makes the exposure positive.
    pub fn label_positive(&self, target_analyte: &str) -> bool {
        self.contains(target_analyte)
    }
}

/// Baseline, exposure and desorption phases of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureSchedule {
    pub baseline_s: f64,
    pub exposure_s: f64,
    pub desorption_s: f64,
}

impl Default for ExposureSchedule {
    fn default() -> Self {
        Self {
            baseline_s: 1.0,
            exposure_s: 5.0,
            desorption_s: 4.0,
        }
    }
}

impl ExposureSchedule {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.baseline_s, self.exposure_s, self.desorption_s]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.baseline_s < 0.0 || self.desorption_s < 0.0 {
            return Err(Error::Schedule(format!(
                "phase durations must be finite and non-negative: {self:?}"
            )));
        }
        if !(self.exposure_s > 0.0) {
            return Err(Error::Schedule(format!(
                "exposure duration must be positive, got {}",
                self.exposure_s
            )));
        }
        Ok(())
    }

    pub fn onset_s(&self) -> f64 {
        self.baseline_s
    }

    pub fn exposure_end_s(&self) -> f64 {
        self.baseline_s + self.exposure_s
    }

    pub fn total_s(&self) -> f64 {
        self.baseline_s + self.exposure_s + self.desorption_s
    }
}

/// Flattened, time-major window of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub window_length_s: f64,
    pub provenance: String,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_validation() {
        assert!(AnalyteMix::single("A", 0.2).is_ok());
        assert!(AnalyteMix::single("A", 0.0).is_err());
        assert!(AnalyteMix::single("A", 1.5).is_err());
        assert!(AnalyteMix::double("A", 0.1, "A", 0.2).is_err());
        assert!(AnalyteMix::new(vec![]).is_err());
        let three = vec![
            ("A".to_string(), 0.1),
            ("B".to_string(), 0.1),
            ("C".to_string(), 0.1),
        ];
        assert!(AnalyteMix::new(three).is_err());
    }

    #[test]
    fn label_follows_target_presence() {
        let ab = AnalyteMix::double("A", 0.125, "B", 0.125).unwrap();
        let bc = AnalyteMix::double("B", 0.125, "C", 0.2).unwrap();
        assert!(ab.label_positive("A"));
        assert!(!bc.label_positive("A"));
    }

    #[test]
    fn schedule_checks() {
        let s = ExposureSchedule::default();
        s.validate().unwrap();
        assert_eq!(s.onset_s(), 1.0);
        assert_eq!(s.total_s(), 10.0);
        let bad = ExposureSchedule {
            exposure_s: 0.0,
            ..s
        };
        assert!(matches!(bad.validate(), Err(Error::Schedule(_))));
    }

    #[test]
    fn trace_rejects_nonfinite() {
        let v = Array2::from_elem((2, 1), f64::NAN);
        assert!(SensorTrace::new(10.0, 0.0, v, vec!["s0".into()]).is_err());
        let v = Array2::zeros((2, 1));
        assert!(SensorTrace::new(0.0, 0.0, v, vec!["s0".into()]).is_err());
    }
}
