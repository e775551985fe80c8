//! Inverse-gradient-norm loss weighting.

use serde::{Deserialize, Serialize};

use super::engine::term_gradients;
use crate::error::{Error, Result};
use crate::netlib::ModelHandle;
use crate::pdeset::PdeProblem;
use crate::sampler::CollocationSet;

/// Gradient norms below this leave the previous weight in place.
pub const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveWeights {
    pub w_bounds: f64,
    pub w_pde: f64,
}

impl Default for AdaptiveWeights {
    fn default() -> Self {
        AdaptiveWeights {
            w_bounds: 1.0,
            w_pde: 1.0,
        }
    }
}

impl AdaptiveWeights {
    pub fn new(w_bounds: f64, w_pde: f64) -> Result<Self> {
        let w = AdaptiveWeights { w_bounds, w_pde };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |w: f64| w > 0.0 && w.is_finite();
        if !(ok(self.w_bounds) && ok(self.w_pde)) {
            return Err(Error::Config(format!(
                "loss weights must be positive and finite, got ({}, {})",
                self.w_bounds, self.w_pde
            )));
        }
        Ok(())
    }

    /// Weights from the two gradient norms; a norm under the floor keeps the
    /// previous weight.
    pub fn from_norms(&self, norm_bounds: f64, norm_pde: f64) -> Result<Self> {
        let pick = |norm: f64, prev: f64| -> Result<f64> {
            if !norm.is_finite() {
                return Err(Error::Diverged {
                    epoch: 0,
                    detail: format!("non-finite loss-gradient norm {norm}"),
                });
            }
            Ok(if norm < NORM_FLOOR { prev } else { 1.0 / norm })
        };
        Ok(AdaptiveWeights {
            w_bounds: pick(norm_bounds, self.w_bounds)?,
            w_pde: pick(norm_pde, self.w_pde)?,
        })
    }
}

/// Recomputes the weights from gradient norms over the full training set.
pub fn update_weights(
    model: &ModelHandle,
    problem: &PdeProblem,
    set: &CollocationSet,
    previous: AdaptiveWeights,
) -> Result<AdaptiveWeights> {
    let g = term_gradients(model, problem, set)?;
    previous.from_norms(g.bounds_norm(), g.pde_norm())
}
