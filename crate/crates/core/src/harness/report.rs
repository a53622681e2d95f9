use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Config;
use crate::{Error, Result};

/// One holdout (or fold) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub protocol: String,
    pub family: String,
    pub target_kind: String,
    pub window_length_s: f64,
    pub seed: u64,
    pub fold: Option<usize>,
    pub n_samples: u64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub r#fn: u64,
    pub mcc: f64,
    pub accuracy: f64,
    pub hyperparameters: String,
}

const REPORT_HEADER: [&str; 14] = [
    "protocol",
    "family",
    "target_kind",
    "window_length_s",
    "seed",
    "fold",
    "n_samples",
    "tp",
    "fp",
    "tn",
    "fn",
    "mcc",
    "accuracy",
    "hyperparameters",
];

impl ReportRow {
    fn key_cmp(&self, other: &Self) -> Ordering {
        (&self.protocol, &self.family, &self.target_kind)
            .cmp(&(&other.protocol, &other.family, &other.target_kind))
            .then(self.window_length_s.total_cmp(&other.window_length_s))
            .then(self.seed.cmp(&other.seed))
            .then(self.fold.cmp(&other.fold))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub config: Config,
}

impl Provenance {
    pub fn new(config: &Config, seeds: Vec<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            master_seed: config.harness.master_seed,
            seeds,
            config_hash: config.hash(),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    /// Sort rows by (protocol, family, kind, window, seed, fold).
    pub fn sort(&mut self) {
        self.rows.sort_by(ReportRow::key_cmp);
    }
}

/// Median and spread of MCC for one (protocol, family, kind, window) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub protocol: String,
    pub family: String,
    pub target_kind: String,
    pub window_length_s: f64,
    pub n: usize,
    pub median_mcc: f64,
    pub q1_mcc: f64,
    pub q3_mcc: f64,
    pub iqr_mcc: f64,
    pub min_mcc: f64,
    pub max_mcc: f64,
}

const SUMMARY_HEADER: [&str; 11] = [
    "protocol",
    "family",
    "target_kind",
    "window_length_s",
    "n",
    "median_mcc",
    "q1_mcc",
    "q3_mcc",
    "iqr_mcc",
    "min_mcc",
    "max_mcc",
];

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut sorted: Vec<&ReportRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.key_cmp(b));
    let mut out = Vec::new();
    let same = |a: &ReportRow, b: &ReportRow| {
        a.protocol == b.protocol
            && a.family == b.family
            && a.target_kind == b.target_kind
            && a.window_length_s == b.window_length_s
    };
    for group in sorted.chunk_by(|a, b| same(a, b)) {
        let mut values: Vec<f64> = group.iter().map(|r| r.mcc).collect();
        values.sort_by(f64::total_cmp);
        let (q1, q3) = (quantile(&values, 0.25), quantile(&values, 0.75));
        let first = group[0];
        out.push(SummaryRow {
            protocol: first.protocol.clone(),
            family: first.family.clone(),
            target_kind: first.target_kind.clone(),
            window_length_s: first.window_length_s,
            n: values.len(),
            median_mcc: quantile(&values, 0.5),
            q1_mcc: q1,
            q3_mcc: q3,
            iqr_mcc: q3 - q1,
            min_mcc: values[0],
            max_mcc: values[values.len() - 1],
        });
    }
    out
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for (i, row) in r.deserialize().enumerate() {
        rows.push(row.map_err(|e| Error::Parse {
            line: i as u64 + 2,
            message: format!("{}: {e}", path.display()),
        })?);
    }
    Ok(rows)
}

/// Write `report.csv`, `summary.csv` and `provenance.json` into `out_dir`.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rows = report.rows.clone();
    rows.sort_by(ReportRow::key_cmp);

    let report_path = out_dir.join("report.csv");
    write_csv(&report_path, &REPORT_HEADER, &rows)?;
    let summary_path = out_dir.join("summary.csv");
    write_csv(&summary_path, &SUMMARY_HEADER, &summarize(&rows))?;
    let provenance_path = out_dir.join("provenance.json");
    let mut json = serde_json::to_string_pretty(&report.provenance)
        .map_err(|e| Error::Data(format!("provenance: {e}")))?;
    json.push('\n');
    fs::write(&provenance_path, json).map_err(|e| Error::io(&provenance_path, e))?;
    Ok(vec![report_path, summary_path, provenance_path])
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    read_csv(path)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    read_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn row(family: &str, window: f64, seed: u64, mcc: f64) -> ReportRow {
        ReportRow {
            protocol: "window".into(),
            family: family.into(),
            target_kind: "none".into(),
            window_length_s: window,
            seed,
            fold: None,
            n_samples: 4,
            tp: 1,
            fp: 1,
            tn: 1,
            r#fn: 1,
            mcc,
            accuracy: 0.5,
            hyperparameters: "C=0.001;class_weight=2".into(),
        }
    }

    fn report(rows: Vec<ReportRow>) -> ExperimentReport {
        ExperimentReport {
            rows,
            provenance: Provenance::new(&Config::default(), vec![0, 1]),
        }
    }

    #[test]
    fn empty_report_writes_headers_only() {
        let tmp = tempfile::tempdir().unwrap();
        emit_report(&report(Vec::new()), tmp.path()).unwrap();
        let text = fs::read_to_string(tmp.path().join("report.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("protocol,family,"));
        let text = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let mut rows = vec![
            row("raw-svc", 2.6666666666666665, 3, 0.123456789012345),
            row("ffnn", 2.4, 1, -1.0 / 3.0),
        ];
        rows[1].fold = Some(2);
        let mut r = report(rows);
        emit_report(&r, tmp.path()).unwrap();
        r.sort();
        assert_eq!(read_report_csv(&tmp.path().join("report.csv")).unwrap(), r.rows);
        let text = fs::read_to_string(tmp.path().join("provenance.json")).unwrap();
        let p: Provenance = serde_json::from_str(&text).unwrap();
        assert_eq!(p, r.provenance);
    }

    #[test]
    fn summary_groups_and_bounds() {
        let mut rows = Vec::new();
        for (i, fam) in ["ffnn", "raw-svc"].iter().enumerate() {
            for w in [2.4, 3.2, 4.0] {
                for s in 0..5u64 {
                    rows.push(row(fam, w, s, ((s * 7 + i as u64) % 5) as f64 / 5.0 - 0.3));
                }
            }
        }
        let summary = summarize(&rows);
        let families: HashSet<_> = rows.iter().map(|r| r.family.clone()).collect();
        let windows: HashSet<_> = rows.iter().map(|r| r.window_length_s.to_bits()).collect();
        assert_eq!(summary.len(), families.len() * windows.len());
        for s in &summary {
            assert_eq!(s.n, 5);
            assert!(s.min_mcc <= s.median_mcc && s.median_mcc <= s.max_mcc);
            assert!(s.iqr_mcc >= 0.0);
        }
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[5.0], 0.75), 5.0);
    }

    #[test]
    fn emission_is_byte_stable() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let r = report(vec![row("ffnn", 3.2, 0, 0.25), row("ffnn", 2.4, 0, 0.5)]);
        emit_report(&r, a.path()).unwrap();
        emit_report(&r, b.path()).unwrap();
        for f in ["report.csv", "summary.csv", "provenance.json"] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        }
    }
}
