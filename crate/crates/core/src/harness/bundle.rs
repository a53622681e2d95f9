//! Single-file model artifact written by `chemvise train`: the embedder
//! parameter dump plus the downstream head and the windowing it expects.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pipeline::{Fitted, Head};
use crate::embedder::{mlp_from_text, mlp_to_text};
use crate::targets::TargetKind;
use crate::{Error, Result};

const FORMAT: &str = "chemvise-model-1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub target_kind: TargetKind,
    pub target_analyte: String,
    pub window_s: f64,
    pub pre_onset_s: f64,
    pub model: Fitted,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Stored {
    format: String,
    target_kind: String,
    target_analyte: String,
    window_s: f64,
    pre_onset_s: f64,
    embedder: String,
    head: Head,
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> Result<()> {
        let Fitted::Embedded { embedder, head } = &self.model else {
            return Err(Error::Config("only embedder models can be bundled".into()));
        };
        let stored = Stored {
            format: FORMAT.into(),
            target_kind: self.target_kind.to_string(),
            target_analyte: self.target_analyte.clone(),
            window_s: self.window_s,
            pre_onset_s: self.pre_onset_s,
            embedder: mlp_to_text(embedder),
            head: head.clone(),
        };
        let json = serde_json::to_string(&stored).map_err(|e| Error::Data(e.to_string()))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let stored: Stored = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: format!("{}: {e}", path.display()),
        })?;
        if stored.format != FORMAT {
            return Err(Error::Parse {
                line: 1,
                message: format!("{}: unsupported model format `{}`", path.display(), stored.format),
            });
        }
        Ok(Self {
            target_kind: stored.target_kind.parse()?,
            target_analyte: stored.target_analyte,
            window_s: stored.window_s,
            pre_onset_s: stored.pre_onset_s,
            model: Fitted::Embedded {
                embedder: mlp_from_text(&stored.embedder)?,
                head: stored.head,
            },
        })
    }
}
