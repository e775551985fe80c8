//! Acceptance criteria 1–9. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Criteria 4–6 train real models for minutes to hours and are `#[ignore]`d;
//! run them with `cargo test --release --test acceptance -- --ignored --nocapture`.
//! Criterion 5 currently fails: fixed unit weights minimise the unweighted
//! training loss directly, so adaptive weights rarely undercut it there, even
//! though they reach a lower MSE at most checkpoints.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pinnlab::bench::{epochs_to_reach, median_curve, median_of_curves, Reach};
use pinnlab::diffkit::{check_grad, Arith, Jet2, ParamVector, Tape, ValueEval};
use pinnlab::netlib::{plan_cpinn, plan_qpinn, ModelHandle, ModelSpec, CPINN_DEPTHS};
use pinnlab::pdeset::{loss_terms, weighted_loss, BoundaryFamily, Domain, PdeProblem, STANDARD_L_VALUES};
use pinnlab::qsim::{run_circuit, CircuitLayout};
use pinnlab::refsolve::{solve, solve_with, EvalGrid, ReferenceSolution, SolverConfig, SolverInput};
use pinnlab::sampler::{sample_sets, should_resample, SobolStream};
use pinnlab::trainer::{term_gradients, train, AdaptiveWeights, MetricsLog, TrainConfig};

const GRAD_TOL: f64 = 1e-4;
const GRAD_STEP: f64 = 1e-5;
const SHIFT_TOL: f64 = 1e-10;
const HEAT_TOL: f64 = 1e-3;
const ORDER2_RATIO: std::ops::RangeInclusive<f64> = 3.5..=4.8;
const HEADLINE_MSE: f64 = 1e-3;
const HEADLINE_RATIO: f64 = 0.5;
const WEIGHTS_WIN_SHARE: f64 = 0.8;
const WEIGHTS_AFTER_EPOCH: u64 = 1000;
const RESAMPLE_FACTOR_LIMIT: f64 = 3.0;

fn report(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

fn with_params(model: &ModelHandle, p: &[f64]) -> ModelHandle {
    ModelHandle::new(model.spec.clone(), ParamVector::new(p.to_vec()), None, 0).unwrap()
}

#[test]
fn criterion_1_loss_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let families = [
        BoundaryFamily::XSin,
        BoundaryFamily::Poly,
        BoundaryFamily::XSinC { c: 2.0 },
    ];
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let spec = if k < 10 {
            ModelSpec::Dense(plan_cpinn(rng.gen_range(40..=250), rng.gen_range(1..=6)).unwrap())
        } else {
            let cd = rng.gen_range(0..=1);
            let spec = plan_qpinn(rng.gen_range(90..=250), cd).unwrap();
            if spec.n_params() > 250 {
                ModelSpec::Hybrid(plan_qpinn(spec.n_params() - 18, cd).unwrap())
            } else {
                ModelSpec::Hybrid(spec)
            }
        };
        assert!(spec.n_params() <= 250, "{}", spec.label());
        let problem = PdeProblem::new(
            STANDARD_L_VALUES[rng.gen_range(0..5)],
            rng.gen_range(0..=1) as f64,
            families[rng.gen_range(0..3)],
        )
        .unwrap();
        let model = ModelHandle::init(spec, None, k).unwrap();
        let (set, _) = sample_sets(8, k, problem.domain).unwrap();
        let w = AdaptiveWeights::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
        let g = term_gradients(&model, &problem, &set).unwrap().weighted(&w);
        let f = |p: &[f64]| {
            let b = loss_terms(&with_params(&model, p), &problem, &set).unwrap();
            weighted_loss(&b, w.w_bounds, w.w_pde).unwrap()
        };
        worst = worst.max(check_grad(f, &g, model.params.values(), GRAD_STEP));
    }
    report(
        1,
        worst < GRAD_TOL,
        &format!("20 models, max relative error {worst:.2e} < {GRAD_TOL:e}"),
    );
}

#[test]
fn criterion_2_parameter_shift_agrees_with_tape() {
    let layout = CircuitLayout::new(3, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inputs: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let thetas: Vec<f64> = (0..layout.n_params()).map(|_| rng.gen_range(-PI..PI)).collect();
    let coeffs = [0.7, -1.3, 0.4];
    let objective = |th: &[f64]| {
        let z = run_circuit(&layout, &mut ValueEval, &inputs, th).unwrap();
        z.iter().zip(coeffs).map(|(z, c)| c * z).sum::<f64>()
    };

    let mut tape = Tape::new();
    let vars = tape.register(&ParamVector::new(thetas.clone()));
    let ins: Vec<_> = inputs.iter().map(|&v| tape.constant(Jet2::constant(v))).collect();
    let z = run_circuit(&layout, &mut tape, &ins, &vars).unwrap();
    let mut acc = tape.constant(Jet2::ZERO);
    for (zq, c) in z.into_iter().zip(coeffs) {
        let term = tape.scale(zq, c);
        acc = tape.add(acc, term);
    }
    let g = tape.grad(acc, &vars).unwrap();

    let mut worst: f64 = 0.0;
    for k in 0..thetas.len() {
        let (mut up, mut dn) = (thetas.clone(), thetas.clone());
        up[k] += PI / 2.0;
        dn[k] -= PI / 2.0;
        let shift = 0.5 * (objective(&up) - objective(&dn));
        worst = worst.max((g.0[k] - shift).abs());
    }
    report(
        2,
        worst < SHIFT_TOL,
        &format!("{} angles, max deviation {worst:.2e} < {SHIFT_TOL:e}", thetas.len()),
    );
}

fn heat_mode(l: f64) -> ReferenceSolution {
    let ic = |x: f64| (PI * x).sin();
    let zero = |_: f64| 0.0;
    let input = SolverInput {
        l,
        n: 0.0,
        domain: Domain::default(),
        initial: &ic,
        forcing: &zero,
    };
    solve_with(&input, &SolverConfig::default()).unwrap()
}

fn final_error(coarse: &ReferenceSolution, fine: &ReferenceSolution) -> f64 {
    let stride = (fine.nx() - 1) / (coarse.nx() - 1);
    let (ic, jf) = (coarse.nt() - 1, fine.nt() - 1);
    (0..coarse.nx())
        .map(|j| (coarse.at(ic, j) - fine.at(jf, j * stride)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_3_reference_solver_is_valid() {
    let mut heat_worst: f64 = 0.0;
    for &l in &STANDARD_L_VALUES {
        let sol = heat_mode(l);
        let last = sol.nt() - 1;
        let amp = (-l * PI * PI).exp();
        for (j, &x) in sol.xs.iter().enumerate() {
            heat_worst = heat_worst.max((sol.at(last, j) - amp * (PI * x).sin()).abs());
        }
    }
    let mut ratios = Vec::new();
    for l in [0.01, 0.1, 1.0] {
        let p = PdeProblem::new(l, 1.0, BoundaryFamily::XSin).unwrap();
        let run = |nx| {
            solve(
                &p,
                &SolverConfig {
                    nx,
                    ..SolverConfig::default()
                },
            )
            .unwrap()
        };
        let fine = run(513);
        ratios.push(final_error(&run(65), &fine) / final_error(&run(129), &fine));
    }
    let order_ok = ratios.iter().all(|r| ORDER2_RATIO.contains(r));
    report(
        3,
        heat_worst < HEAT_TOL && order_ok,
        &format!("heat error {heat_worst:.2e} < {HEAT_TOL:e}; N=1 halving ratios {ratios:.2?} in {ORDER2_RATIO:?}"),
    );
}

fn grid_for(problem: &PdeProblem) -> EvalGrid {
    EvalGrid::new(&solve(problem, &SolverConfig::default()).unwrap())
}

fn runs(
    spec: &ModelSpec,
    problem: &PdeProblem,
    grid: &EvalGrid,
    config: TrainConfig,
    seeds: &[u64],
) -> Vec<MetricsLog> {
    seeds
        .iter()
        .map(|&seed| {
            let model = ModelHandle::init(spec.clone(), Some(250), seed).unwrap();
            train(model, problem, &TrainConfig { seed, ..config }, grid)
                .unwrap()
                .log
        })
        .collect()
}

#[test]
#[ignore = "about a day of single-core compute"]
fn criterion_4_hybrid_needs_fewer_epochs() {
    let problem = PdeProblem::new(0.1, 1.0, BoundaryFamily::XSin).unwrap();
    let grid = grid_for(&problem);
    let seeds = [0, 1, 2];
    let q_cfg = TrainConfig {
        epochs: 20_000,
        n_points: 1024,
        ..TrainConfig::default()
    };
    let c_cfg = TrainConfig {
        epochs: 100_000,
        ..q_cfg
    };
    let q = median_curve(&runs(
        &ModelSpec::Hybrid(plan_qpinn(250, 1).unwrap()),
        &problem,
        &grid,
        q_cfg,
        &seeds,
    ))
    .unwrap();
    let c = CPINN_DEPTHS
        .map(|d| {
            median_curve(&runs(
                &ModelSpec::Dense(plan_cpinn(250, d).unwrap()),
                &problem,
                &grid,
                c_cfg,
                &seeds,
            ))
            .unwrap()
        })
        .min_by(|a, b| a.last().unwrap().1.total_cmp(&b.last().unwrap().1))
        .unwrap();
    let (eq, ec) = (epochs_to_reach(&q, HEADLINE_MSE), epochs_to_reach(&c, HEADLINE_MSE));
    let pass = match (eq, ec) {
        (Reach::Reached(a), Reach::Reached(b)) => (a as f64) < HEADLINE_RATIO * b as f64,
        _ => false,
    };
    report(
        4,
        pass,
        &format!("epochs to {HEADLINE_MSE:e}: qPINN {eq:?}, best cPINN {ec:?}; need ratio < {HEADLINE_RATIO}"),
    );
}

#[test]
#[ignore = "minutes of training; known to fail"]
fn criterion_5_adaptive_weights_lower_training_loss() {
    let problem = PdeProblem::new(0.1, 0.0, BoundaryFamily::XSin).unwrap();
    let grid = grid_for(&problem);
    let spec = ModelSpec::Dense(plan_cpinn(250, 4).unwrap());
    let base = TrainConfig {
        epochs: 5000,
        n_points: 256,
        ..TrainConfig::default()
    };
    let seeds = [0, 1, 2];
    let adaptive = runs(&spec, &problem, &grid, base, &seeds);
    let fixed = runs(
        &spec,
        &problem,
        &grid,
        TrainConfig {
            adaptive_weights: false,
            ..base
        },
        &seeds,
    );
    let curve = |logs: &[MetricsLog], f: fn(&pinnlab::trainer::MetricsRow) -> Option<f64>| {
        let curves: Vec<Vec<(u64, f64)>> = logs
            .iter()
            .map(|l| {
                l.rows
                    .iter()
                    .filter(|r| r.mse.is_some())
                    .map(|r| (r.epoch, f(r).unwrap()))
                    .collect()
            })
            .collect();
        median_of_curves(&curves).unwrap()
    };
    let share = |f: fn(&pinnlab::trainer::MetricsRow) -> Option<f64>| {
        let (a, b) = (curve(&adaptive, f), curve(&fixed, f));
        let pts: Vec<bool> = a
            .iter()
            .zip(&b)
            .filter(|(p, _)| p.0 > WEIGHTS_AFTER_EPOCH)
            .map(|(p, q)| p.1 <= q.1)
            .collect();
        pts.iter().filter(|&&w| w).count() as f64 / pts.len() as f64
    };
    let loss_share = share(|r| Some(r.loss_train));
    let mse_share = share(|r| r.mse);
    report(
        5,
        loss_share >= WEIGHTS_WIN_SHARE,
        &format!(
            "adaptive L_train <= fixed at {:.0}% of checkpoints after epoch {WEIGHTS_AFTER_EPOCH} (need {:.0}%); MSE at {:.0}%",
            100.0 * loss_share,
            100.0 * WEIGHTS_WIN_SHARE,
            100.0 * mse_share
        ),
    );
}

#[test]
#[ignore = "minutes of training"]
fn criterion_6_resampling_compensates_for_fewer_points() {
    let problem = PdeProblem::new(0.1, 1.0, BoundaryFamily::XSin).unwrap();
    let grid = grid_for(&problem);
    let spec = ModelSpec::Dense(plan_cpinn(250, 4).unwrap());
    let seeds = [0, 1, 2];
    let base = TrainConfig {
        epochs: 5000,
        ..TrainConfig::default()
    };
    let final_mse = |cfg: TrainConfig| {
        median(
            runs(&spec, &problem, &grid, cfg, &seeds)
                .iter()
                .map(|l| l.final_mse().unwrap())
                .collect(),
        )
    };
    let small_rs = final_mse(TrainConfig { n_points: 256, ..base });
    let small_fixed = final_mse(TrainConfig {
        n_points: 256,
        resample: false,
        ..base
    });
    let large_rs = final_mse(TrainConfig { n_points: 1024, ..base });
    report(
        6,
        small_rs <= RESAMPLE_FACTOR_LIMIT * large_rs && small_fixed > small_rs,
        &format!("median final MSE: 256 resampled {small_rs:.2e}, 256 fixed {small_fixed:.2e}, 1024 resampled {large_rs:.2e}"),
    );
}

#[test]
fn criterion_7_resample_trigger_boundary() {
    let mut checked = 0;
    let mut pass = !should_resample(0.10, 0.11).unwrap() && should_resample(0.10, 0.1100001).unwrap();
    for i in 0..=40 {
        for j in 0..=40 {
            let (train_loss, val_loss) = (i as f64 * 0.025, j as f64 * 0.025);
            pass &= should_resample(train_loss, val_loss).unwrap() == (val_loss > 1.1 * train_loss);
            checked += 1;
        }
    }
    report(
        7,
        pass,
        &format!("{checked} grid pairs plus (0.10, 0.11) -> no trigger"),
    );
}

#[test]
fn criterion_8_repeated_cells_are_byte_identical() {
    let problem = PdeProblem::new(0.1, 1.0, BoundaryFamily::XSin).unwrap();
    let grid = EvalGrid::new(
        &solve(
            &problem,
            &SolverConfig {
                nx: 65,
                dt: 1e-3,
                save_every: 50,
            },
        )
        .unwrap(),
    );
    let cfg = TrainConfig {
        epochs: 60,
        n_points: 32,
        eval_every: 10,
        seed: 7,
        ..TrainConfig::default()
    };
    let mut identical = true;
    for spec in [
        ModelSpec::Dense(plan_cpinn(100, 2).unwrap()),
        ModelSpec::Hybrid(plan_qpinn(100, 1).unwrap()),
    ] {
        let csv = || {
            let model = ModelHandle::init(spec.clone(), Some(100), 7).unwrap();
            train(model, &problem, &cfg, &grid).unwrap().log.to_csv_string()
        };
        identical &= csv().as_bytes() == csv().as_bytes();
    }
    report(8, identical, "cPINN and qPINN cells rerun with seed 7");
}

/// Textbook Sobol construction: direction integers from the primitive
/// polynomial recurrence, point `i` as the XOR of the directions selected by
/// the Gray code of `i`.
fn reference_sobol(i: u32) -> [f64; 2] {
    const BITS: u32 = 32;
    let mut m = [1u64; BITS as usize];
    for k in 1..BITS as usize {
        // x + 1: m_k = 2·m_{k−1} XOR m_{k−1}
        m[k] = (m[k - 1] << 1) ^ m[k - 1];
    }
    let gray = i ^ (i >> 1);
    let mut out = [0u64; 2];
    for k in 0..BITS {
        if gray >> k & 1 == 1 {
            out[0] ^= 1 << (BITS - 1 - k);
            out[1] ^= m[k as usize] << (BITS - 1 - k);
        }
    }
    [out[0] as f64 / 2f64.powi(32), out[1] as f64 / 2f64.powi(32)]
}

#[test]
fn criterion_9_sobol_prefix_matches_reference() {
    let mut s = SobolStream::new(2);
    let ours: Vec<[f64; 2]> = (0..8)
        .map(|_| {
            let p = s.next_point();
            [p[0], p[1]]
        })
        .collect();
    let reference: Vec<[f64; 2]> = (1..=8).map(reference_sobol).collect();
    let table = [
        [0.5, 0.5],
        [0.75, 0.25],
        [0.25, 0.75],
        [0.375, 0.375],
        [0.875, 0.875],
        [0.625, 0.125],
        [0.125, 0.625],
        [0.1875, 0.3125],
    ];
    report(
        9,
        ours == reference && ours == table,
        &format!("first 8 points {ours:?}"),
    );
}
