//! JSON checkpoint records.
//!
//! ```json
//! {
//!   "format": "pinnlab-checkpoint",
//!   "version": 1,
//!   "spec": {"kind": "cpinn", "widths": [2, 8, 8, 1]},
//!   "params": [0.12, -0.4, ...],
//!   "seed": 7,
//!   "epoch": 2000,
//!   "target_params": 100
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::ModelHandle;
use super::spec::ModelSpec;
use crate::diffkit::ParamVector;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "pinnlab-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub spec: ModelSpec,
    pub params: Vec<f64>,
    pub seed: u64,
    pub epoch: u64,
    #[serde(default)]
    pub target_params: Option<usize>,
}

impl Checkpoint {
    pub fn from_model(model: &ModelHandle, epoch: u64) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            spec: model.spec.clone(),
            params: model.params.values().to_vec(),
            seed: model.seed,
            epoch,
            target_params: model.target_params,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serialises")
    }

    /// Parses and validates a checkpoint record.
    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Parse(format!("checkpoint: {e}")))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Parse(format!("unexpected checkpoint format {:?}", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint version {}", ck.version)));
        }
        ck.spec.validate()?;
        if ck.params.len() != ck.spec.n_params() {
            return Err(Error::Parse(format!(
                "checkpoint holds {} parameters but its spec needs {}",
                ck.params.len(),
                ck.spec.n_params()
            )));
        }
        if ck.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parse("checkpoint contains non-finite parameters".into()));
        }
        Ok(ck)
    }

    pub fn into_model(self) -> Result<ModelHandle> {
        ModelHandle::new(self.spec, ParamVector::new(self.params), self.target_params, self.seed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
