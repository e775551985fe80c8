//! The experiment matrix and its execution.
//!
//! Every cell (problem × size × point count × kind × seed) trains all of its
//! architecture candidates: cPINNs at each hidden depth, qPINNs at each
//! classical depth. The candidate with the lowest final MSE represents the
//! cell. Aborted candidates stay in the record set.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlib::{plan_cpinn, plan_qpinn, ModelHandle, ModelKind, ModelSpec};
use crate::pdeset::{BoundaryFamily, PdeProblem};
use crate::refsolve::{load_or_solve, solve, EvalGrid, SolverConfig};
use crate::trainer::{train, MetricsLog, RunStatus, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentMatrix {
    #[serde(rename = "L")]
    pub l_values: Vec<f64>,
    #[serde(rename = "N")]
    pub n_values: Vec<f64>,
    /// Family names; `xsinc` expands over `c_values`.
    pub families: Vec<String>,
    pub c_values: Vec<f64>,
    pub params: Vec<usize>,
    pub points: Vec<usize>,
    pub seeds: Vec<u64>,
    pub kinds: Vec<ModelKind>,
    pub cpinn_epochs: u64,
    pub qpinn_epochs: u64,
    pub cpinn_depths: Vec<usize>,
    pub qpinn_depth_c: Vec<usize>,
    pub success_threshold: f64,
    /// Worker threads; 0 uses every core.
    pub parallelism: usize,
}

impl Default for ExperimentMatrix {
    /// Desk-scale profile: one `L` per decade, three seeds, cPINNs to 10⁵ epochs.
    fn default() -> Self {
        ExperimentMatrix {
            l_values: vec![0.01, 0.1, 1.0],
            n_values: vec![0.0, 1.0],
            families: vec!["xsin".into()],
            c_values: Vec::new(),
            params: vec![100, 150, 200, 250],
            points: vec![256, 512, 1024],
            seeds: vec![0, 1, 2],
            kinds: vec![ModelKind::Cpinn, ModelKind::Qpinn],
            cpinn_epochs: 100_000,
            qpinn_epochs: 20_000,
            cpinn_depths: (1..=6).collect(),
            qpinn_depth_c: vec![0, 1],
            success_threshold: 1e-2,
            parallelism: 0,
        }
    }
}

/// One cell of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub problem: PdeProblem,
    pub target_params: usize,
    pub n_points: usize,
    pub kind: ModelKind,
    pub seed: u64,
}

impl Cell {
    pub fn id(&self) -> String {
        format!(
            "{}_{}_p{}_n{}_s{}",
            self.kind,
            self.problem.label(),
            self.target_params,
            self.n_points,
            self.seed
        )
    }

    /// Identifier shared by all seeds of the same configuration.
    pub fn group_id(&self) -> String {
        format!(
            "{}_{}_p{}_n{}",
            self.kind,
            self.problem.label(),
            self.target_params,
            self.n_points
        )
    }
}

impl ExperimentMatrix {
    /// Full reference campaign: all five `L`, ten seeds, cPINNs to 10⁶ epochs.
    pub fn full_scale() -> Self {
        ExperimentMatrix {
            l_values: crate::pdeset::STANDARD_L_VALUES.to_vec(),
            seeds: (0..10).collect(),
            cpinn_epochs: 1_000_000,
            ..ExperimentMatrix::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("L", self.l_values.len()),
            ("N", self.n_values.len()),
            ("families", self.families.len()),
            ("params", self.params.len()),
            ("points", self.points.len()),
            ("seeds", self.seeds.len()),
            ("kinds", self.kinds.len()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, n)| *n == 0) {
            return Err(Error::Config(format!("matrix list `{name}` is empty")));
        }
        if self.kinds.contains(&ModelKind::Cpinn) && self.cpinn_depths.is_empty() {
            return Err(Error::Config("cpinn_depths is empty".into()));
        }
        if self.kinds.contains(&ModelKind::Qpinn) && self.qpinn_depth_c.is_empty() {
            return Err(Error::Config("qpinn_depth_c is empty".into()));
        }
        if !(self.success_threshold >= 0.0) {
            return Err(Error::Config("success_threshold must be non-negative".into()));
        }
        self.problems()?;
        Ok(())
    }

    pub fn families(&self) -> Result<Vec<BoundaryFamily>> {
        let mut out = Vec::new();
        for name in &self.families {
            if name == "xsinc" {
                if self.c_values.is_empty() {
                    return Err(Error::Config("family xsinc needs c_values".into()));
                }
                for &c in &self.c_values {
                    out.push(BoundaryFamily::from_parts(name, Some(c))?);
                }
            } else {
                out.push(BoundaryFamily::from_parts(name, None)?);
            }
        }
        Ok(out)
    }

    /// Distinct problems, ordered by family, then `L`, then `N`.
    pub fn problems(&self) -> Result<Vec<PdeProblem>> {
        let mut out = Vec::new();
        for family in self.families()? {
            for &l in &self.l_values {
                for &n in &self.n_values {
                    out.push(PdeProblem::new(l, n, family)?);
                }
            }
        }
        Ok(out)
    }

    /// Cartesian product in a fixed order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = Vec::new();
        for problem in self.problems()? {
            for &target_params in &self.params {
                for &n_points in &self.points {
                    for &kind in &self.kinds {
                        for &seed in &self.seeds {
                            out.push(Cell {
                                problem,
                                target_params,
                                n_points,
                                kind,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Architecture candidates for `cell`.
    pub fn candidates(&self, cell: &Cell) -> Result<Vec<ModelSpec>> {
        match cell.kind {
            ModelKind::Cpinn => self
                .cpinn_depths
                .iter()
                .map(|&d| plan_cpinn(cell.target_params, d).map(ModelSpec::Dense))
                .collect(),
            ModelKind::Qpinn => self
                .qpinn_depth_c
                .iter()
                .map(|&c| plan_qpinn(cell.target_params, c).map(ModelSpec::Hybrid))
                .collect(),
        }
    }

    pub fn epochs_for(&self, kind: ModelKind) -> u64 {
        match kind {
            ModelKind::Cpinn => self.cpinn_epochs,
            ModelKind::Qpinn => self.qpinn_epochs,
        }
    }

    pub fn n_training_runs(&self) -> Result<usize> {
        let cells = self.cells()?;
        Ok(cells
            .iter()
            .map(|c| match c.kind {
                ModelKind::Cpinn => self.cpinn_depths.len(),
                ModelKind::Qpinn => self.qpinn_depth_c.len(),
            })
            .sum())
    }
}

/// Filename-safe short tag for an architecture.
pub fn arch_tag(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::Dense(d) => {
            let width = d.widths.get(1).copied().unwrap_or(0);
            format!("d{}w{}", d.hidden_layers(), width)
        }
        ModelSpec::Hybrid(h) => format!("c{}q{}", h.encoder.hidden_layers(), h.circuit.depth),
    }
}

/// Flat record of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub cell_id: String,
    pub group_id: String,
    pub kind: ModelKind,
    pub family: String,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub target_params: usize,
    pub n_params: usize,
    pub n_points: usize,
    pub seed: u64,
    pub architecture: String,
    pub status: String,
    pub diverged_epoch: Option<u64>,
    pub epochs_completed: u64,
    pub final_mse: Option<f64>,
    pub representative: bool,
}

impl RunRecord {
    fn usable_mse(&self) -> Option<f64> {
        self.final_mse.filter(|m| m.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    /// All candidates, in candidate order.
    pub runs: Vec<(RunRecord, MetricsLog)>,
    /// Index of the representative run in `runs`.
    pub representative: usize,
}

impl CellResult {
    pub fn representative(&self) -> &(RunRecord, MetricsLog) {
        &self.runs[self.representative]
    }
}

/// Where and how to run a matrix.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; overrides the matrix field when set.
    pub parallelism: Option<usize>,
    /// Reference cache; solves in memory when absent.
    pub cache_dir: Option<PathBuf>,
    /// Per-run CSV/JSON files go to `<out_dir>/runs/`.
    pub out_dir: Option<PathBuf>,
}

/// Lowest usable final MSE wins; completed runs beat diverged ones; ties go
/// to the earlier candidate.
pub fn pick_representative(records: &[RunRecord]) -> usize {
    let key = |r: &RunRecord| (r.status != "completed", r.usable_mse().unwrap_or(f64::INFINITY));
    let mut best = 0;
    for (i, r) in records.iter().enumerate().skip(1) {
        let (a, b) = (key(r), key(&records[best]));
        if (!a.0 && b.0) || (a.0 == b.0 && a.1 < b.1) {
            best = i;
        }
    }
    best
}

fn record_for(cell: &Cell, spec: &ModelSpec, log: &MetricsLog, status: &RunStatus) -> RunRecord {
    let (status, diverged_epoch) = match status {
        RunStatus::Completed => ("completed".to_string(), None),
        RunStatus::Diverged { epoch, .. } => ("diverged".to_string(), Some(*epoch)),
    };
    RunRecord {
        run_id: format!("{}__{}", cell.id(), arch_tag(spec)),
        cell_id: cell.id(),
        group_id: cell.group_id(),
        kind: cell.kind,
        family: cell.problem.family.label(),
        l: cell.problem.l,
        n: cell.problem.n,
        target_params: cell.target_params,
        n_params: spec.n_params(),
        n_points: cell.n_points,
        seed: cell.seed,
        architecture: spec.label(),
        status,
        diverged_epoch,
        epochs_completed: log.last().map_or(0, |r| r.epoch),
        final_mse: log.final_mse(),
        representative: false,
    }
}

/// Runs every cell of `matrix` and selects representatives.
///
/// `base` supplies everything except epochs, point count and seed, which
/// come from the cell. Results are in cell order regardless of parallelism.
pub fn run_matrix(
    matrix: &ExperimentMatrix,
    base: &TrainConfig,
    solver: &SolverConfig,
    options: &RunOptions,
) -> Result<Vec<CellResult>> {
    matrix.validate()?;
    let problems = matrix.problems()?;
    let mut grids = Vec::with_capacity(problems.len());
    for p in &problems {
        let sol = match &options.cache_dir {
            Some(dir) => load_or_solve(p, solver, dir)?,
            None => solve(p, solver)?,
        };
        grids.push(EvalGrid::new(&sol));
    }
    let cells = matrix.cells()?;
    let mut jobs = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let grid = problems
            .iter()
            .position(|p| *p == cell.problem)
            .expect("cell problem comes from the problem list");
        for spec in matrix.candidates(cell)? {
            jobs.push((ci, grid, spec));
        }
    }
    if let Some(dir) = &options.out_dir {
        let runs = dir.join("runs");
        std::fs::create_dir_all(&runs).map_err(|e| Error::io(&runs, e))?;
    }
    let threads = options.parallelism.unwrap_or(matrix.parallelism);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<Result<(usize, RunRecord, MetricsLog)>> = pool.install(|| {
        jobs.par_iter()
            .map(|(ci, gi, spec)| {
                let cell = &cells[*ci];
                let config = TrainConfig {
                    epochs: matrix.epochs_for(cell.kind),
                    n_points: cell.n_points,
                    seed: cell.seed,
                    ..*base
                };
                let model = ModelHandle::init(spec.clone(), Some(cell.target_params), cell.seed)?;
                let out = train(model, &cell.problem, &config, &grids[*gi])?;
                let record = record_for(cell, spec, &out.log, &out.status);
                if let Some(dir) = &options.out_dir {
                    write_run(&dir.join("runs"), &record, &out, &cell.problem, &config)?;
                }
                Ok((*ci, record, out.log))
            })
            .collect()
    });
    let mut results: Vec<CellResult> = cells
        .into_iter()
        .map(|cell| CellResult {
            cell,
            runs: Vec::new(),
            representative: 0,
        })
        .collect();
    for o in outcomes {
        let (ci, record, log) = o?;
        results[ci].runs.push((record, log));
    }
    for r in &mut results {
        let records: Vec<RunRecord> = r.runs.iter().map(|(rec, _)| rec.clone()).collect();
        r.representative = pick_representative(&records);
        r.runs[r.representative].0.representative = true;
    }
    Ok(results)
}

fn write_run(
    dir: &Path,
    record: &RunRecord,
    out: &crate::trainer::TrainOutcome,
    problem: &PdeProblem,
    config: &TrainConfig,
) -> Result<()> {
    out.log.save_csv(&dir.join(format!("{}.csv", record.run_id)))?;
    let json = dir.join(format!("{}.json", record.run_id));
    std::fs::write(&json, out.summary(&record.run_id, problem, config).to_json()).map_err(|e| Error::io(&json, e))?;
    let ckpt = crate::netlib::Checkpoint::from_model(&out.model, record.epochs_completed);
    ckpt.save(&dir.join(format!("{}.ckpt.json", record.run_id)))
}
