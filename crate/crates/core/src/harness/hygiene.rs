//! Holdout sealing. Test-split trials are fingerprinted when a study is
//! loaded and handed out only against a [`Frozen`] hyperparameter set; any
//! change to a holdout file in between is a hard error.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::grid::Frozen;
use crate::signals::{Split, Trial, TrialDataset, TrialRecord};
use crate::{Error, Result};

#[derive(Debug, Clone)]
enum Source {
    Dir(PathBuf),
    Memory(Vec<Trial>),
}

#[derive(Debug, Clone)]
pub struct SealedHoldout {
    source: Source,
    records: Vec<TrialRecord>,
    digests: Vec<[u8; 32]>,
}

fn record_line(record: &TrialRecord) -> String {
    format!("{record:?}")
}

fn digest(record: &TrialRecord, signal: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(record_line(record).as_bytes());
    h.update([0u8]);
    h.update(signal);
    h.finalize().into()
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

impl SealedHoldout {
    /// Seal trials that exist only in memory.
    pub fn seal(trials: Vec<Trial>) -> Self {
        let records: Vec<TrialRecord> = trials.iter().map(Trial::record).collect();
        let digests = trials
            .iter()
            .zip(&records)
            .map(|(t, r)| digest(r, crate::signals::signal_csv_text(&t.trace).as_bytes()))
            .collect();
        Self {
            source: Source::Memory(trials),
            records,
            digests,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn trial_ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.trial_id.as_str())
    }

    /// Verify every fingerprint and return the holdout trials.
    pub fn open(&self, _frozen: &Frozen) -> Result<Vec<Trial>> {
        match &self.source {
            Source::Memory(trials) => Ok(trials.clone()),
            Source::Dir(dir) => {
                let current: Vec<TrialRecord> = TrialDataset::read_records(dir)?
                    .into_iter()
                    .filter(|r| r.split == Split::Test)
                    .collect();
                if current.len() != self.records.len() {
                    return Err(Error::Hygiene(format!(
                        "{} holdout trials sealed, {} present now",
                        self.records.len(),
                        current.len()
                    )));
                }
                let mut trials = Vec::with_capacity(current.len());
                for ((sealed, now), expected) in self.records.iter().zip(&current).zip(&self.digests) {
                    let path = TrialDataset::signal_path(dir, &sealed.trial_id);
                    let bytes = read_bytes(&path)?;
                    if sealed != now || digest(now, &bytes) != *expected {
                        return Err(Error::Hygiene(format!(
                            "holdout trial {} changed after it was sealed ({})",
                            sealed.trial_id,
                            path.display()
                        )));
                    }
                    trials.push(TrialDataset::load_trial(dir, now)?);
                }
                Ok(trials)
            }
        }
    }
}

/// Load the non-holdout trials of a study directory and seal its holdout.
pub fn load_sealed(dir: &Path) -> Result<(Vec<Trial>, SealedHoldout)> {
    let records = TrialDataset::read_records(dir)?;
    let mut open = Vec::new();
    let mut sealed = Vec::new();
    let mut digests = Vec::new();
    for record in records {
        if record.split == Split::Test {
            let bytes = read_bytes(&TrialDataset::signal_path(dir, &record.trial_id))?;
            digests.push(digest(&record, &bytes));
            sealed.push(record);
        } else {
            open.push(TrialDataset::load_trial(dir, &record)?);
        }
    }
    Ok((
        open,
        SealedHoldout {
            source: Source::Dir(dir.to_path_buf()),
            records: sealed,
            digests,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::HyperParams;
    use crate::signals::{AffinityModel, AffinityParams, DatasetDesign};

    fn study(dir: &Path) {
        let design = DatasetDesign {
            replicates: 1,
            holdout_doubles: 4,
            sample_rate_hz: 5.0,
            ..DatasetDesign::default()
        };
        let model = AffinityModel::generate(&design.analytes, &AffinityParams::default()).unwrap();
        design.generate(&model).unwrap().write(dir).unwrap();
    }

    #[test]
    fn untouched_holdout_opens() {
        let tmp = tempfile::tempdir().unwrap();
        study(tmp.path());
        let (open, sealed) = load_sealed(tmp.path()).unwrap();
        assert_eq!(open.len(), 16);
        assert_eq!(sealed.len(), 4);
        let trials = sealed.open(&Frozen::without_search(HyperParams::default())).unwrap();
        assert!(trials.iter().all(|t| t.split == Split::Test));
    }

    #[test]
    fn mutated_signal_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        study(tmp.path());
        let (_, sealed) = load_sealed(tmp.path()).unwrap();
        let path = TrialDataset::signal_path(tmp.path(), "d0002");
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("99,1,1,1,1,1,1,1,1\n");
        fs::write(&path, text).unwrap();
        let err = sealed
            .open(&Frozen::without_search(HyperParams::default()))
            .unwrap_err();
        assert!(matches!(err, Error::Hygiene(_)));
    }
}
