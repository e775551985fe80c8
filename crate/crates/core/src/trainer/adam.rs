//! Adam optimiser and the learning-rate schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
    if params.len() != state.m.len() || grad.len() != state.m.len() {
        return Err(Error::Structural(format!(
            "Adam state has {} entries, params {}, gradient {}",
            state.m.len(),
            params.len(),
            grad.len()
        )));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::Diverged {
            epoch: state.step,
            detail: format!("non-finite gradient component {i}: {}", grad[i]),
        });
    }
    state.step += 1;
    let c1 = 1.0 - BETA1.powf(state.step as f64);
    let c2 = 1.0 - BETA2.powf(state.step as f64);
    for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut state.m).zip(&mut state.v) {
        *m = BETA1 * *m + (1.0 - BETA1) * g;
        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
    }
    Ok(())
}

/// Exponential decay from `initial` at epoch 0 to `last` at the final epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrSchedule {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule {
            initial: 0.01,
            last: 0.001,
        }
    }
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial > 0.0 && self.last > 0.0 && self.initial.is_finite() && self.last.is_finite()) {
            return Err(Error::Config(format!(
                "learning rates must be positive, got {} → {}",
                self.initial, self.last
            )));
        }
        Ok(())
    }

    /// `initial · (last/initial)^(epoch/budget)`.
    pub fn at(&self, epoch: u64, budget: u64) -> f64 {
        if budget == 0 {
            return self.initial;
        }
        let frac = epoch.min(budget) as f64 / budget as f64;
        self.initial * (self.last / self.initial).powf(frac)
    }

    pub fn describe(&self) -> String {
        format!("{}*({}/{})^(epoch/budget)", self.initial, self.last, self.initial)
    }
}

/// Default schedule evaluated at `epoch` of `budget`.
pub fn lr_at(epoch: u64, budget: u64) -> f64 {
    LrSchedule::default().at(epoch, budget)
}
