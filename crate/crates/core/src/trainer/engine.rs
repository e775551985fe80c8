//! Per-term loss gradients via one reused tape.
//!
//! Parameter leaves are recorded once; each collocation point then records its
//! own subgraph, sweeps it and rewinds back to the parameter mark. Points are
//! visited in set order, so results are bitwise reproducible.

use crate::diffkit::{Arith, Tape, Var};
use crate::error::{Error, Result};
use crate::netlib::ModelHandle;
use crate::pdeset::{point_loss, LossBreakdown, PdeProblem, PointKind};
use crate::sampler::{CollocationSet, Point};

use super::weights::AdaptiveWeights;

/// Loss terms with the gradients of `L_pde` and `L_bounds = L_t + L_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGradients {
    pub losses: LossBreakdown,
    pub pde: Vec<f64>,
    pub bounds: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|g| g * g).sum::<f64>().sqrt()
}

impl TermGradients {
    pub fn pde_norm(&self) -> f64 {
        norm(&self.pde)
    }

    pub fn bounds_norm(&self) -> f64 {
        norm(&self.bounds)
    }

    /// Gradient of `w_bounds·L_bounds + w_pde·L_pde`.
    pub fn weighted(&self, w: &AdaptiveWeights) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(&self.pde)
            .map(|(b, p)| w.w_bounds * b + w.w_pde * p)
            .collect()
    }
}

/// Holds a tape between calls so its buffers are reused.
#[derive(Debug, Default)]
pub struct GradEngine {
    tape: Tape,
}

impl GradEngine {
    pub fn new() -> Self {
        GradEngine::default()
    }

    pub fn term_gradients(
        &mut self,
        model: &ModelHandle,
        problem: &PdeProblem,
        set: &CollocationSet,
    ) -> Result<TermGradients> {
        let n_params = model.n_params();
        let mut pde = vec![0.0; n_params];
        let mut bounds = vec![0.0; n_params];
        self.tape.clear();
        let params = self.tape.register(&model.params);
        let mark = self.tape.len();
        let mut means = [0.0; 3];
        let groups: [(PointKind, &[Point]); 3] = [
            (PointKind::Interior, &set.interior),
            (PointKind::Initial, &set.initial),
            (PointKind::Boundary, &set.boundary),
        ];
        for (slot, (kind, pts)) in groups.into_iter().enumerate() {
            if pts.is_empty() {
                return Err(Error::Structural(format!("{kind:?} point set is empty")));
            }
            let out = if kind == PointKind::Interior {
                &mut pde
            } else {
                &mut bounds
            };
            means[slot] = self.accumulate(model, problem, kind, pts, &params, mark, out)?;
        }
        Ok(TermGradients {
            losses: LossBreakdown::new(means[0], means[1], means[2]),
            pde,
            bounds,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn accumulate(
        &mut self,
        model: &ModelHandle,
        problem: &PdeProblem,
        kind: PointKind,
        pts: &[Point],
        params: &[Var],
        mark: usize,
        out: &mut [f64],
    ) -> Result<f64> {
        let scale = 1.0 / pts.len() as f64;
        let mut sum = 0.0;
        for &p in pts {
            self.tape.rewind(mark);
            let loss = point_loss(&mut self.tape, &model.spec, params, problem, kind, p);
            sum += self.tape.value(loss);
            self.tape.accumulate_grad(loss, scale, params, out)?;
        }
        Ok(sum * scale)
    }
}

/// One-shot form of [`GradEngine::term_gradients`].
pub fn term_gradients(model: &ModelHandle, problem: &PdeProblem, set: &CollocationSet) -> Result<TermGradients> {
    GradEngine::new().term_gradients(model, problem, set)
}
