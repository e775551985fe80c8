//! The training loop: Adam over four contiguous minibatches per epoch,
//! inverse-gradient-norm loss weights refreshed once per epoch, validation
//! driven resampling and periodic MSE against a reference solution.

mod adam;
mod engine;
mod metrics;
mod weights;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, lr_at, AdamState, LrSchedule, BETA1, BETA2, EPSILON};
pub use engine::{term_gradients, GradEngine, TermGradients};
pub use metrics::{MetricsLog, MetricsRow, RunStatus, RunSummary, CSV_HEADER};
pub use weights::{update_weights, AdaptiveWeights, NORM_FLOOR};

use crate::error::{Error, Result};
use crate::netlib::ModelHandle;
use crate::pdeset::{loss_terms, weighted_loss, LossBreakdown, PdeProblem};
use crate::refsolve::EvalGrid;
use crate::sampler::{should_resample, CollocationSet, SetSampler};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: u64,
    /// Points in each of the interior, initial and boundary sets.
    pub n_points: usize,
    pub batches: usize,
    pub eval_every: u64,
    pub lr: LrSchedule,
    /// Seeds collocation sampling; model initialisation has its own seed.
    pub seed: u64,
    pub adaptive_weights: bool,
    /// Starting weights, kept throughout when adaptation is off.
    pub initial_weights: AdaptiveWeights,
    pub resample: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20_000,
            n_points: 1024,
            batches: 4,
            eval_every: 100,
            lr: LrSchedule::default(),
            seed: 0,
            adaptive_weights: true,
            initial_weights: AdaptiveWeights::default(),
            resample: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        if self.epochs != 0 && self.epochs < self.eval_every {
            return Err(Error::Config(format!(
                "epochs ({}) must be 0 or at least eval_every ({})",
                self.epochs, self.eval_every
            )));
        }
        if self.batches == 0 || !self.n_points.is_multiple_of(self.batches) || self.batches > self.n_points {
            return Err(Error::Config(format!(
                "{} batches do not split {} points evenly",
                self.batches, self.n_points
            )));
        }
        self.lr.validate()?;
        self.initial_weights.validate()
    }
}

/// Result of a run. On divergence `model` holds the last finite parameters.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ModelHandle,
    pub log: MetricsLog,
    pub status: RunStatus,
    pub resample_count: usize,
    pub wall_time_s: f64,
}

impl TrainOutcome {
    pub fn summary(&self, run_id: &str, problem: &PdeProblem, config: &TrainConfig) -> RunSummary {
        RunSummary {
            run_id: run_id.to_string(),
            model: self.model.spec.label(),
            kind: self.model.spec.kind().to_string(),
            n_params: self.model.n_params(),
            problem: *problem,
            config: *config,
            lr_schedule: config.lr.describe(),
            status: self.status.clone(),
            epochs_completed: self.log.last().map_or(0, |r| r.epoch),
            final_mse: self.log.final_mse(),
            final_loss_train: self.log.last().map(|r| r.loss_train),
            resample_count: self.resample_count,
            wall_time_s: self.wall_time_s,
        }
    }
}

struct Sets {
    train: CollocationSet,
    val: CollocationSet,
    batches: Vec<CollocationSet>,
}

impl Sets {
    fn new((train, val): (CollocationSet, CollocationSet), k: usize) -> Self {
        let batches = (0..k).map(|b| train.batch(b, k)).collect();
        Sets { train, val, batches }
    }
}

fn diverged(epoch: u64, what: &str, b: &LossBreakdown) -> Error {
    Error::Diverged {
        epoch,
        detail: format!("non-finite {what} loss (pde {}, bounds {})", b.pde, b.bounds),
    }
}

/// Trains `model` to the epoch budget; see [`train_observed`].
pub fn train(
    model: ModelHandle,
    problem: &PdeProblem,
    config: &TrainConfig,
    reference: &EvalGrid,
) -> Result<TrainOutcome> {
    train_observed(model, problem, config, reference, |_, _| {})
}

/// Like [`train`], calling `observe(epoch, model)` after every completed epoch
/// (and once for the initial state at epoch 0).
pub fn train_observed(
    mut model: ModelHandle,
    problem: &PdeProblem,
    config: &TrainConfig,
    reference: &EvalGrid,
    mut observe: impl FnMut(u64, &ModelHandle),
) -> Result<TrainOutcome> {
    config.validate()?;
    problem.validate()?;
    let start = Instant::now();
    let budget = config.epochs;
    let mut sampler = SetSampler::new(config.n_points, config.seed, problem.domain)?;
    let mut sets = Sets::new(sampler.draw(), config.batches);
    let mut weights = config.initial_weights;
    let mut adam = AdamState::new(model.n_params());
    let mut engine = GradEngine::new();
    let mut log = MetricsLog::default();
    let mut status = RunStatus::Completed;

    let tr = loss_terms(&model, problem, &sets.train)?;
    let va = loss_terms(&model, problem, &sets.val)?;
    let mse = reference.mse(&model);
    log.push(MetricsRow {
        epoch: 0,
        loss_train: tr.total(),
        loss_weighted: weighted_loss(&tr, weights.w_bounds, weights.w_pde)?,
        loss_pde_train: tr.pde,
        loss_t_train: tr.t,
        loss_x_train: tr.x,
        loss_val: va.total(),
        w_bounds: weights.w_bounds,
        w_pde: weights.w_pde,
        lr: config.lr.at(0, budget),
        mse: Some(mse),
        resampled: false,
    })?;
    observe(0, &model);
    if !(tr.is_finite() && va.is_finite() && mse.is_finite()) {
        status = RunStatus::Diverged {
            epoch: 0,
            detail: "non-finite loss at initialisation".into(),
        };
    }

    let mut epoch = 1;
    while epoch <= budget && status == RunStatus::Completed {
        let last_good = model.params.clone();
        let step = run_epoch(
            epoch,
            &mut model,
            problem,
            config,
            reference,
            &mut sets,
            &mut sampler,
            &mut weights,
            &mut adam,
            &mut engine,
        );
        match step {
            Ok(row) => {
                log.push(row)?;
                observe(epoch, &model);
            }
            Err(Error::Diverged { detail, .. }) => {
                model.params = last_good;
                status = RunStatus::Diverged { epoch, detail };
            }
            Err(e) => return Err(e),
        }
        epoch += 1;
    }

    Ok(TrainOutcome {
        model,
        log,
        status,
        resample_count: sampler.resample_count(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_epoch(
    epoch: u64,
    model: &mut ModelHandle,
    problem: &PdeProblem,
    config: &TrainConfig,
    reference: &EvalGrid,
    sets: &mut Sets,
    sampler: &mut SetSampler,
    weights: &mut AdaptiveWeights,
    adam: &mut AdamState,
    engine: &mut GradEngine,
) -> Result<MetricsRow> {
    let lr = config.lr.at(epoch - 1, config.epochs);
    if config.adaptive_weights {
        let g = engine.term_gradients(model, problem, &sets.train)?;
        *weights = weights.from_norms(g.bounds_norm(), g.pde_norm()).map_err(|e| match e {
            Error::Diverged { detail, .. } => Error::Diverged { epoch, detail },
            other => other,
        })?;
    }
    for batch in &sets.batches {
        let g = engine.term_gradients(model, problem, batch)?;
        adam_step(adam, model.params.values_mut(), &g.weighted(weights), lr)?;
    }
    let tr = loss_terms(model, problem, &sets.train)?;
    if !tr.is_finite() {
        return Err(diverged(epoch, "training", &tr));
    }
    let va = loss_terms(model, problem, &sets.val)?;
    if !va.is_finite() {
        return Err(diverged(epoch, "validation", &va));
    }
    let mse = if epoch.is_multiple_of(config.eval_every) || epoch == config.epochs {
        let m = reference.mse(model);
        if !m.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: format!("non-finite MSE {m}"),
            });
        }
        Some(m)
    } else {
        None
    };
    let resampled = config.resample && should_resample(tr.total(), va.total())?;
    if resampled {
        *sets = Sets::new(sampler.draw(), config.batches);
    }
    Ok(MetricsRow {
        epoch,
        loss_train: tr.total(),
        loss_weighted: weighted_loss(&tr, weights.w_bounds, weights.w_pde)?,
        loss_pde_train: tr.pde,
        loss_t_train: tr.t,
        loss_x_train: tr.x,
        loss_val: va.total(),
        w_bounds: weights.w_bounds,
        w_pde: weights.w_pde,
        lr,
        mse,
        resampled,
    })
}
