//! Dataset directory layout.
//!
//! ```text
//! <dir>/trials.csv            trial_id,analyte_1,conc_1,analyte_2,conc_2,onset_s,duration_s,split
//! <dir>/signals/<id>.csv      time_s,s0,...,s7   (one row per sample)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{simulate_trial, AffinityModel, AnalyteMix, ExposureSchedule, SensorTrace};
use crate::seed::{derive_seed, derived_rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split `{other}`"))),
        }
    }
}

/// One row of `trials.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    pub analyte_1: String,
    pub conc_1: f64,
    pub analyte_2: Option<String>,
    pub conc_2: Option<f64>,
    pub onset_s: f64,
    pub duration_s: f64,
    pub split: Split,
}

impl TrialRecord {
    pub fn mix(&self) -> Result<AnalyteMix> {
        let mut components = vec![(self.analyte_1.clone(), self.conc_1)];
        match (&self.analyte_2, self.conc_2) {
            (Some(a), Some(c)) if !a.is_empty() => components.push((a.clone(), c)),
            (None, None) => {}
            (Some(a), None) if a.is_empty() => {}
            _ => {
                return Err(Error::Data(format!(
                    "trial {}: analyte_2 and conc_2 must both be set or both empty",
                    self.trial_id
                )))
            }
        }
        AnalyteMix::new(components)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub id: String,
    pub mix: AnalyteMix,
    pub onset_s: f64,
    pub split: Split,
    pub trace: SensorTrace,
}

impl Trial {
    pub fn record(&self) -> TrialRecord {
        let c = self.mix.components();
        TrialRecord {
            trial_id: self.id.clone(),
            analyte_1: c[0].0.clone(),
            conc_1: c[0].1,
            analyte_2: c.get(1).map(|x| x.0.clone()),
            conc_2: c.get(1).map(|x| x.1),
            onset_s: self.onset_s,
            duration_s: self.trace.duration_s(),
            split: self.split,
        }
    }
}

/// Layout of a synthetic study: replicated singles for training and a holdout
/// of doubles spread over every analyte pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetDesign {
    pub analytes: Vec<String>,
    pub concentrations: Vec<f64>,
    pub replicates: usize,
    pub holdout_doubles: usize,
    pub schedule: ExposureSchedule,
    pub sample_rate_hz: f64,
}

impl Default for DatasetDesign {
    fn default() -> Self {
        Self {
            analytes: ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect(),
            concentrations: vec![0.125, 0.15, 0.2, 0.25],
            replicates: 5,
            holdout_doubles: 39,
            schedule: ExposureSchedule::default(),
            sample_rate_hz: 50.0,
        }
    }
}

impl DatasetDesign {
    /// All unordered analyte pairs in listing order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.analytes.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.analytes.len() < 2 {
            return Err(Error::Config("need at least two analytes".into()));
        }
        if self.concentrations.is_empty() || self.replicates == 0 {
            return Err(Error::Config(
                "need at least one concentration and one replicate".into(),
            ));
        }
        self.schedule.validate()
    }

    /// Simulate every trial. Each trial's noise seed is derived from the model
    /// seed and the trial id.
    pub fn generate(&self, model: &AffinityModel) -> Result<TrialDataset> {
        self.validate()?;
        let mut trials = Vec::new();
        let mut index = 0;
        for analyte in &self.analytes {
            for &conc in &self.concentrations {
                for _ in 0..self.replicates {
                    let id = format!("s{index:04}");
                    index += 1;
                    let mix = AnalyteMix::single(analyte, conc)?;
                    trials.push(self.simulate(model, id, mix, Split::Train)?);
                }
            }
        }
        let pairs = self.pairs();
        let mut conc_rng = derived_rng(model.seed, "holdout-concentrations");
        for i in 0..self.holdout_doubles {
            let (a, b) = pairs[i % pairs.len()];
            let ca = self.concentrations[conc_rng.random_range(0..self.concentrations.len())];
            let cb = self.concentrations[conc_rng.random_range(0..self.concentrations.len())];
            let mix = AnalyteMix::double(&self.analytes[a], ca, &self.analytes[b], cb)?;
            trials.push(self.simulate(model, format!("d{i:04}"), mix, Split::Test)?);
        }
        Ok(TrialDataset { trials })
    }

    fn simulate(
        &self,
        model: &AffinityModel,
        id: String,
        mix: AnalyteMix,
        split: Split,
    ) -> Result<Trial> {
        let seed = derive_seed(model.seed, &format!("trial/{id}"));
        let trace = simulate_trial(&mix, model, &self.schedule, self.sample_rate_hz, seed)?;
        Ok(Trial {
            id,
            mix,
            onset_s: self.schedule.onset_s(),
            split,
            trace,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialDataset {
    pub trials: Vec<Trial>,
}

impl TrialDataset {
    pub fn trials_csv(dir: &Path) -> PathBuf {
        dir.join("trials.csv")
    }

    pub fn signal_path(dir: &Path, trial_id: &str) -> PathBuf {
        dir.join("signals").join(format!("{trial_id}.csv"))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let signals = dir.join("signals");
        fs::create_dir_all(&signals).map_err(|e| Error::io(&signals, e))?;
        let index = Self::trials_csv(dir);
        let mut w = csv::Writer::from_path(&index).map_err(|e| csv_error(&index, e))?;
        for trial in &self.trials {
            w.serialize(trial.record()).map_err(|e| csv_error(&index, e))?;
            write_signal_csv(&Self::signal_path(dir, &trial.id), &trial.trace)?;
        }
        w.flush().map_err(|e| Error::io(&index, e))?;
        Ok(())
    }

    pub fn read_records(dir: &Path) -> Result<Vec<TrialRecord>> {
        let index = Self::trials_csv(dir);
        let mut r = csv::Reader::from_path(&index).map_err(|e| csv_error(&index, e))?;
        let mut records = Vec::new();
        for row in r.deserialize::<TrialRecord>() {
            records.push(row.map_err(|e| csv_error(&index, e))?);
        }
        Ok(records)
    }

    pub fn load_trial(dir: &Path, record: &TrialRecord) -> Result<Trial> {
        let trace = read_signal_csv(&Self::signal_path(dir, &record.trial_id))?;
        Ok(Trial {
            id: record.trial_id.clone(),
            mix: record.mix()?,
            onset_s: record.onset_s,
            split: record.split,
            trace,
        })
    }

    /// Load every trial whose split satisfies `keep`.
    pub fn read_filtered(dir: &Path, keep: impl Fn(Split) -> bool) -> Result<Self> {
        let trials = Self::read_records(dir)?
            .iter()
            .filter(|r| keep(r.split))
            .map(|r| Self::load_trial(dir, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { trials })
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Self::read_filtered(dir, |_| true)
    }

    pub fn by_split(&self, split: Split) -> impl Iterator<Item = &Trial> {
        self.trials.iter().filter(move |t| t.split == split)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            line,
            message: format!("{}: {other:?}", path.display()),
        },
    }
}

/// Serialize a trace to CSV text with round-trip float formatting.
pub(crate) fn signal_csv_text(trace: &SensorTrace) -> String {
    let mut out = String::from("time_s");
    for name in trace.channel_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, row) in trace.values().outer_iter().enumerate() {
        out.push_str(&trace.time_at(i).to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn write_signal_csv(path: &Path, trace: &SensorTrace) -> Result<()> {
    fs::write(path, signal_csv_text(trace)).map_err(|e| Error::io(path, e))
}

pub fn read_signal_csv(path: &Path) -> Result<SensorTrace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        line: line as u64,
        message: format!("{}: {message}", path.display()),
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty signal file".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if header.first() != Some(&"time_s") || header.len() < 2 {
        return Err(parse_err(1, "header must be time_s,s0,...".into()));
    }
    let n_channels = header.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(parse_err(
                line_no,
                format!("expected {} cells, found {}", header.len(), cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric cell `{cell}`")))?;
            if j == 0 {
                times.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if times.len() < 2 {
        return Err(parse_err(2, "a signal needs at least two samples".into()));
    }
    let span = times[times.len() - 1] - times[0];
    if !(span > 0.0) {
        return Err(parse_err(2, "time column must increase".into()));
    }
    // Written times are exact multiples of 1/fs; recover fs to micro-hertz.
    let sample_rate = (((times.len() - 1) as f64 / span) * 1e6).round() / 1e6;
    let values = Array2::from_shape_vec((times.len(), n_channels), values)
        .map_err(|e| parse_err(2, e.to_string()))?;
    SensorTrace::new(
        sample_rate,
        times[0],
        values,
        header[1..].iter().map(|s| s.to_string()).collect(),
    )
}
