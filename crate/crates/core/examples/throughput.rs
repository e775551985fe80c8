//! Times gradient passes and full epochs for representative models.
//!
//! `cargo run --release -p pinnlab --example throughput`

use std::time::Instant;

use pinnlab::netlib::{plan_cpinn, plan_qpinn, ModelHandle, ModelSpec};
use pinnlab::pdeset::{BoundaryFamily, PdeProblem};
use pinnlab::refsolve::{solve, EvalGrid, SolverConfig};
use pinnlab::sampler::sample_sets;
use pinnlab::trainer::{train, GradEngine, TrainConfig};

fn main() -> pinnlab::Result<()> {
    let problem = PdeProblem::new(0.1, 1.0, BoundaryFamily::XSin)?;
    let t0 = Instant::now();
    let reference = solve(&problem, &SolverConfig::default())?;
    println!("reference solve: {:.2}s", t0.elapsed().as_secs_f64());
    let grid = EvalGrid::new(&reference);
    let (set, _) = sample_sets(256, 0, problem.domain)?;
    let models = [
        ("cpinn d4", ModelSpec::Dense(plan_cpinn(250, 4)?)),
        ("cpinn d1", ModelSpec::Dense(plan_cpinn(250, 1)?)),
        ("qpinn c0", ModelSpec::Hybrid(plan_qpinn(250, 0)?)),
        ("qpinn c1", ModelSpec::Hybrid(plan_qpinn(250, 1)?)),
    ];
    for (name, spec) in models {
        let model = ModelHandle::init(spec, Some(250), 1)?;
        let mut engine = GradEngine::new();
        let reps = 5;
        let t = Instant::now();
        for _ in 0..reps {
            engine.term_gradients(&model, &problem, &set)?;
        }
        let per_point = t.elapsed().as_secs_f64() / (reps * 3 * set.n()) as f64;
        let t = Instant::now();
        let mse = grid.mse(&model);
        let mse_time = t.elapsed().as_secs_f64();
        let config = TrainConfig {
            epochs: 100,
            n_points: 256,
            ..TrainConfig::default()
        };
        let t = Instant::now();
        let out = train(model.clone(), &problem, &config, &grid)?;
        let per_epoch = t.elapsed().as_secs_f64() / 100.0;
        println!(
            "{name:9} {:>4} params  grad/point {:7.2}us  mse-eval {:6.3}s (mse {mse:.3e})  epoch@256 {:7.4}s  final mse {:.3e}",
            model.n_params(),
            per_point * 1e6,
            mse_time,
            per_epoch,
            out.log.final_mse().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
