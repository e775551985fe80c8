//! TOML run configuration.
//!
//! ```toml
//! [problem]
//! L = 0.1
//! N = 1.0
//! family = "xsin"      # "poly", or "xsinc" with c = ...
//!
//! [model]
//! kind = "qpinn"       # or "cpinn"
//! params = 250
//! depth = 4            # cPINN hidden layers
//! depth_c = 1          # qPINN classical hidden layers
//! seed = 0
//!
//! [training]
//! epochs = 20000
//! n_points = 1024
//! seed = 0
//!
//! [reference]
//! nx = 513
//! dt = 1e-4
//!
//! [matrix]             # only for `experiment`
//! L = [0.1]
//! N = [1.0]
//! seeds = [0, 1, 2]
//! ```
//!
//! Every section except `problem` is optional and falls back to defaults;
//! unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::ExperimentMatrix;
use crate::error::{Error, Result};
use crate::netlib::{plan_cpinn, plan_qpinn, ModelHandle, ModelKind, ModelSpec};
use crate::pdeset::PdeProblem;
use crate::qsim::EncodingSchedule;
use crate::refsolve::SolverConfig;
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Target number of trainable parameters.
    pub params: usize,
    pub depth: usize,
    pub depth_c: usize,
    pub seed: u64,
    pub encoding: EncodingSchedule,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Qpinn,
            params: 250,
            depth: 4,
            depth_c: 1,
            seed: 0,
            encoding: EncodingSchedule::default(),
        }
    }
}

impl ModelConfig {
    pub fn spec(&self) -> Result<ModelSpec> {
        Ok(match self.kind {
            ModelKind::Cpinn => ModelSpec::Dense(plan_cpinn(self.params, self.depth)?),
            ModelKind::Qpinn => {
                let mut h = plan_qpinn(self.params, self.depth_c)?;
                h.circuit.encoding = self.encoding;
                ModelSpec::Hybrid(h)
            }
        })
    }

    pub fn build(&self) -> Result<ModelHandle> {
        ModelHandle::init(self.spec()?, Some(self.params), self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: PdeProblem,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub reference: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ExperimentMatrix>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.model.spec()?.validate()?;
        self.training.validate()?;
        self.reference.validate()?;
        if let Some(m) = &self.matrix {
            m.validate()?;
        }
        Ok(())
    }
}
