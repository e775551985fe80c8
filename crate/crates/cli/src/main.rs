//! `pinnlab` command-line front end.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use pinnlab::bench::{
    landscape_slice, load_representatives, probe_intermediates, ratio_curves, run_matrix, write_matrix_tables,
    write_ratio_tables, write_success_table, RunOptions, DEFAULT_SUCCESS_THRESHOLD,
};
use pinnlab::config::RunConfig;
use pinnlab::netlib::{Checkpoint, ModelHandle};
use pinnlab::refsolve::{cache_path, load_or_solve, solve, EvalGrid, ReferenceSolution};
use pinnlab::trainer::{train, RunStatus};

#[derive(Parser)]
#[command(
    name = "pinnlab",
    version,
    about = "Train and compare classical and hybrid quantum PINNs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write its metrics, summary and checkpoint.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the epoch budget from the config.
        #[arg(long)]
        epochs: Option<u64>,
        /// Reference-solution cache directory.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Solve and cache the reference solution for the configured problem.
    Reference {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        /// Also export the saved grid as long-format CSV (`t,x,u`).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the configured experiment matrix and write merged tables.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Worker threads (0 = all cores); overrides the config.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Recompute median curves and epoch/MSE ratio tables for an experiment directory.
    Ratios {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Write the success-ratio table for an experiment directory.
    Success {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SUCCESS_THRESHOLD)]
        threshold: f64,
    },
    /// MSE over a grid of two parameters around a checkpoint.
    Landscape {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Config providing the problem and reference settings.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
        #[arg(long, default_value_t = 21)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Encoder and circuit outputs of a hybrid checkpoint on a uniform grid.
    Probe {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 51)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
        /// Config providing the problem domain; the unit square otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn reference_for(cfg: &RunConfig, cache: Option<&Path>) -> Result<ReferenceSolution> {
    Ok(match cache {
        Some(dir) => load_or_solve(&cfg.problem, &cfg.reference, dir)?,
        None => solve(&cfg.problem, &cfg.reference)?,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_train(config: &Path, out: &Path, epochs: Option<u64>, cache: Option<&Path>) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(e) = epochs {
        cfg.training.epochs = e;
        cfg.training.validate()?;
    }
    create_dir(out)?;
    let grid = EvalGrid::new(&reference_for(&cfg, cache)?);
    let model = cfg.model.build()?;
    let label = model.spec.label();
    let outcome = train(model, &cfg.problem, &cfg.training, &grid)?;
    outcome.log.save_csv(&out.join("metrics.csv"))?;
    let run_id = format!("{}_{}", cfg.model.kind, cfg.problem.label());
    write(
        &out.join("summary.json"),
        outcome.summary(&run_id, &cfg.problem, &cfg.training).to_json(),
    )?;
    let epoch = outcome.log.last().map_or(0, |r| r.epoch);
    Checkpoint::from_model(&outcome.model, epoch).save(&out.join("checkpoint.json"))?;
    println!(
        "{label}: {} params, {} epochs, final MSE {:.4e}, {} resamples",
        outcome.model.n_params(),
        epoch,
        outcome.log.final_mse().unwrap_or(f64::NAN),
        outcome.resample_count
    );
    if let RunStatus::Diverged { epoch, detail } = &outcome.status {
        bail!("training diverged at epoch {epoch}: {detail}");
    }
    Ok(())
}

fn cmd_reference(config: &Path, cache: &Path, csv: Option<&Path>) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let sol = load_or_solve(&cfg.problem, &cfg.reference, cache)?;
    println!("{}", cache_path(cache, &cfg.problem, &cfg.reference).display());
    if let Some(path) = csv {
        let mut text = String::from("t,x,u\n");
        for (it, t) in sol.times.iter().enumerate() {
            for (ix, x) in sol.xs.iter().enumerate() {
                text.push_str(&format!("{t},{x},{}\n", sol.at(it, ix)));
            }
        }
        write(path, text)?;
    }
    Ok(())
}

fn cmd_experiment(config: &Path, out: &Path, cache: Option<&Path>, parallelism: Option<usize>) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let Some(matrix) = &cfg.matrix else {
        bail!("{} has no [matrix] section", config.display());
    };
    create_dir(out)?;
    let options = RunOptions {
        parallelism,
        cache_dir: cache.map(Path::to_path_buf),
        out_dir: Some(out.to_path_buf()),
    };
    let results = run_matrix(matrix, &cfg.training, &cfg.reference, &options)?;
    write_matrix_tables(out, &results)?;
    let reps: Vec<_> = results.iter().map(|r| r.representative().clone()).collect();
    write_ratio_tables(out, &reps)?;
    let records: Vec<_> = reps.iter().map(|(r, _)| r.clone()).collect();
    write_success_table(out, &records, matrix.success_threshold)?;
    let runs: usize = results.iter().map(|r| r.runs.len()).sum();
    let aborted = results
        .iter()
        .flat_map(|r| &r.runs)
        .filter(|(r, _)| r.status != "completed")
        .count();
    println!("{} cells, {runs} training runs, {aborted} aborted", results.len());
    Ok(())
}

fn cmd_ratios(dir: &Path) -> Result<()> {
    let reps = load_representatives(dir)?;
    let groups = write_ratio_tables(dir, &reps)?;
    for q in groups.iter().filter(|g| g.kind == pinnlab::netlib::ModelKind::Qpinn) {
        if let Some(c) = groups.iter().find(|c| {
            c.kind == pinnlab::netlib::ModelKind::Cpinn
                && c.family == q.family
                && c.l == q.l
                && c.n == q.n
                && c.target_params == q.target_params
                && c.n_points == q.n_points
        }) {
            let rc = ratio_curves(&q.curve, &c.curve)?;
            match rc.min_epoch_ratio() {
                Some(r) => println!("{}: min epoch ratio {r:.3}", q.group_id),
                None => println!("{}: no defined epoch ratio", q.group_id),
            }
        }
    }
    Ok(())
}

fn cmd_success(dir: &Path, threshold: f64) -> Result<()> {
    let records: Vec<_> = load_representatives(dir)?.into_iter().map(|(r, _)| r).collect();
    write_success_table(dir, &records, threshold)?;
    let report = pinnlab::bench::success_ratio(&records, threshold);
    for g in &report.groups {
        println!("{} n={} {}: {}/{}", g.family, g.n_points, g.kind, g.successes, g.total);
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<ModelHandle> {
    Ok(Checkpoint::load(path)?.into_model()?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_landscape(
    checkpoint: &Path,
    config: &Path,
    i: usize,
    j: usize,
    half_width: f64,
    resolution: usize,
    out: &Path,
    cache: Option<&Path>,
) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let model = load_model(checkpoint)?;
    let grid = EvalGrid::new(&reference_for(&cfg, cache)?);
    let slice = landscape_slice(&model, &grid, i, j, half_width, resolution)?;
    write(out, slice.to_csv())?;
    println!("centre MSE {:.4e}", slice.center_mse);
    Ok(())
}

fn cmd_probe(checkpoint: &Path, resolution: usize, out: &Path, config: Option<&Path>) -> Result<()> {
    let domain = match config {
        Some(p) => RunConfig::load(p)?.problem.domain,
        None => Default::default(),
    };
    let model = load_model(checkpoint)?;
    let probe = probe_intermediates(&model, &domain, resolution)?;
    write(out, probe.to_csv())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train {
            config,
            out,
            epochs,
            cache,
        } => cmd_train(&config, &out, epochs, cache.as_deref()),
        Command::Reference { config, cache, csv } => cmd_reference(&config, &cache, csv.as_deref()),
        Command::Experiment {
            config,
            out,
            cache,
            parallelism,
        } => cmd_experiment(&config, &out, cache.as_deref(), parallelism),
        Command::Ratios { dir } => cmd_ratios(&dir),
        Command::Success { dir, threshold } => cmd_success(&dir, threshold),
        Command::Landscape {
            checkpoint,
            config,
            i,
            j,
            half_width,
            resolution,
            out,
            cache,
        } => cmd_landscape(
            &checkpoint,
            &config,
            i,
            j,
            half_width,
            resolution,
            &out,
            cache.as_deref(),
        ),
        Command::Probe {
            checkpoint,
            resolution,
            out,
            config,
        } => cmd_probe(&checkpoint, resolution, &out, config.as_deref()),
    }
}
