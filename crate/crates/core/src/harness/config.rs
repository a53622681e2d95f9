use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grid::GridSpec;
use super::protocol::linspace;
use crate::augment::MixPolicy;
use crate::embedder::TrainConfig;
use crate::signals::{AffinityParams, DatasetDesign};
use crate::targets::{SemanticParams, DEFAULT_DIMENSION};
use crate::{Error, Result};

/// Full run configuration, read from a JSON document with one object per
/// section. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub simulator: SimulatorConfig,
    pub targets: TargetsConfig,
    pub augment: AugmentConfig,
    pub embedder: TrainConfig,
    pub classify: ClassifyConfig,
    pub harness: HarnessConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorConfig {
    pub design: DatasetDesign,
    pub sensors: AffinityParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetsConfig {
    pub dimension: usize,
    /// Semantic vectors to load; a synthetic clustered space is used when absent.
    pub embeddings: Option<PathBuf>,
    pub semantic: SemanticParams,
    pub simplex_seed: u64,
    /// Regress onto targets multiplied by `sqrt(dimension)`, giving unit RMS
    /// per coordinate to match the output scale of a freshly initialized
    /// network. Distances and angles are unchanged up to that factor.
    pub unit_rms_training: bool,
}

impl Default for TargetsConfig {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION,
            embeddings: None,
            semantic: SemanticParams::default(),
            simplex_seed: 29,
            unit_rms_training: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub mix_probability: f64,
    /// Also mix the training data of the FFNN and raw-feature SVC baselines.
    pub augment_baselines: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        let p = MixPolicy::default();
        Self {
            lambda_min: p.lambda_min,
            lambda_max: p.lambda_max,
            mix_probability: p.mix_probability,
            augment_baselines: true,
        }
    }
}

impl AugmentConfig {
    pub fn policy(&self, seed: u64) -> MixPolicy {
        MixPolicy {
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            mix_probability: self.mix_probability,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub target_analyte: String,
    pub knn_k: usize,
    pub svc_iterations: usize,
    /// SVC settings for single fits outside a grid search.
    pub svc_c: f64,
    pub class_weight: f64,
    /// Synthetic two-analyte blends added to a head's training set; defaults to
    /// the number of training singles.
    pub head_mixes: Option<usize>,
    /// Rescale embedding and raw-feature inputs to unit RMS per coordinate
    /// before the SVC. Principal coordinates are never rescaled.
    pub standardize: bool,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            target_analyte: "A".into(),
            knn_k: crate::classify::DEFAULT_K,
            svc_iterations: crate::classify::SVC_ITERATIONS,
            svc_c: 1e-3,
            class_weight: 1.0,
            head_mixes: None,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub master_seed: u64,
    /// Signal kept before the exposure onset in every window.
    pub pre_onset_s: f64,
    pub windows_s: Vec<f64>,
    pub representation_window_s: f64,
    pub grid: GridSpec,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            pre_onset_s: 0.4,
            windows_s: linspace(2.4, 4.0, 7),
            representation_window_s: 4.0,
            grid: GridSpec::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Config = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        if config.harness.windows_s.is_empty() {
            return Err(Error::Config("window list is empty".into()));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { line, message } => Error::Config(format!(
                "{}: line {line}: {message}",
                path.display()
            )),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.simulator.design.validate()?;
        self.augment.policy(0).validate()?;
        self.embedder.validate()?;
        self.harness.grid.validate()?;
        let c = &self.classify;
        if c.knn_k % 2 == 0 || c.svc_iterations == 0 {
            return Err(Error::Config(format!(
                "knn_k must be odd and svc_iterations positive, got {} and {}",
                c.knn_k, c.svc_iterations
            )));
        }
        if !self.simulator.design.analytes.contains(&c.target_analyte) {
            return Err(Error::Lookup(c.target_analyte.clone()));
        }
        let h = &self.harness;
        if !(h.pre_onset_s >= 0.0) || h.windows_s.iter().any(|w| !(*w > h.pre_onset_s)) {
            return Err(Error::Config(
                "windows must be longer than the pre-onset margin".into(),
            ));
        }
        Ok(())
    }

    /// Canonical JSON echo used in provenance files.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON echo, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
