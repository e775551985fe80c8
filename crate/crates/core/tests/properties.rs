//! Randomised invariants across the library.

use proptest::prelude::*;

use pinnlab::bench::{epochs_to_reach, median_curve, success_ratio, RunRecord};
use pinnlab::diffkit::{Arith, Jet2, ValueEval};
use pinnlab::netlib::{plan_cpinn, Checkpoint, DenseSpec, ModelHandle, ModelKind, ModelSpec};
use pinnlab::pdeset::{BoundaryFamily, Domain, PdeProblem};
use pinnlab::qsim::{run_circuit, Axis, CircuitLayout, Statevector};
use pinnlab::refsolve::{decode, encode, ReferenceSolution, SolverConfig};
use pinnlab::sampler::{sample_sets, should_resample, SobolStream, RESAMPLE_FACTOR};
use pinnlab::trainer::{LrSchedule, MetricsLog, MetricsRow};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn log_of(curve: &[(u64, f64)]) -> MetricsLog {
    let mut log = MetricsLog::default();
    for &(epoch, mse) in curve {
        log.push(row(epoch, mse, 0.5, false)).unwrap();
    }
    log
}

fn row(epoch: u64, mse: f64, loss: f64, resampled: bool) -> MetricsRow {
    MetricsRow {
        epoch,
        loss_train: loss,
        loss_weighted: loss * 1.5,
        loss_pde_train: loss / 3.0,
        loss_t_train: loss / 5.0,
        loss_x_train: loss / 7.0,
        loss_val: loss * 1.01,
        w_bounds: 2.0 + loss,
        w_pde: 0.5,
        lr: 1e-3,
        mse: if epoch.is_multiple_of(2) { Some(mse) } else { None },
        resampled,
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn jets_match_finite_differences(seed in 0u64..1000, depth in 1usize..4, width in 2usize..6,
                                     t in 0.05f64..0.95, x in 0.05f64..0.95) {
        let m = ModelHandle::init(ModelSpec::Dense(DenseSpec::uniform(2, width, depth, 1)), None, seed).unwrap();
        let j = m.eval_jet(t, x);
        let h = 1e-4;
        let dt = (m.eval(t + h, x) - m.eval(t - h, x)) / (2.0 * h);
        let dx = (m.eval(t, x + h) - m.eval(t, x - h)) / (2.0 * h);
        let hh = 1e-3;
        let dxx = (m.eval(t, x + hh) - 2.0 * m.eval(t, x) + m.eval(t, x - hh)) / (hh * hh);
        prop_assert!((j.v - m.eval(t, x)).abs() < 1e-14);
        prop_assert!((j.dt - dt).abs() < 1e-6 * dt.abs().max(1.0));
        prop_assert!((j.dx - dx).abs() < 1e-6 * dx.abs().max(1.0));
        prop_assert!((j.dxx - dxx).abs() < 1e-4 * dxx.abs().max(1.0));
    }

    #[test]
    fn circuit_preserves_norm(n_q in 1usize..5, gates in prop::collection::vec((0u8..4, 0usize..4, -6.0f64..6.0), 1..40)) {
        let mut ar = ValueEval;
        let mut sv = Statevector::zero(&mut ar, n_q).unwrap();
        for (g, q, angle) in gates {
            let q = q % n_q;
            match g {
                0 => sv.apply_rotation(&mut ar, Axis::X, q, angle).unwrap(),
                1 => sv.apply_rotation(&mut ar, Axis::Y, q, angle).unwrap(),
                2 => sv.apply_fixed_rotation(&mut ar, Axis::Z, q, angle).unwrap(),
                _ if n_q > 1 => sv.apply_cnot(q, (q + 1) % n_q).unwrap(),
                _ => {}
            }
        }
        prop_assert!((sv.norm_sqr(&ar) - 1.0).abs() < 1e-12);
        for q in 0..n_q {
            let z = sv.expect_z(&mut ar, q).unwrap();
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&z));
        }
    }

    #[test]
    fn circuit_expectations_are_bounded(n_q in 1usize..5, depth in 1usize..4, seed in any::<u64>()) {
        let layout = CircuitLayout::new(n_q, depth);
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 8.0 - 4.0
        };
        let inputs: Vec<f64> = (0..n_q).map(|_| next()).collect();
        let thetas: Vec<f64> = (0..layout.n_params()).map(|_| next()).collect();
        let out = run_circuit(&layout, &mut ValueEval, &inputs, &thetas).unwrap();
        prop_assert_eq!(out.len(), n_q);
        prop_assert!(out.iter().all(|z| z.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn planned_width_is_closest(target in 9usize..3000, depth in 1usize..7) {
        let count = |w: usize| DenseSpec::uniform(2, w, depth, 1).n_params();
        prop_assume!(target >= count(1));
        let s = plan_cpinn(target, depth).unwrap();
        let got = s.n_params().abs_diff(target);
        for w in 1..200 {
            prop_assert!(got <= count(w).abs_diff(target));
        }
        prop_assert_eq!(s.hidden_layers(), depth);
    }

    #[test]
    fn collocation_points_stay_inside(n_exp in 3u32..11, seed in any::<u64>()) {
        let d = Domain::default();
        let (train, val) = sample_sets(1 << n_exp, seed, d).unwrap();
        for s in [&train, &val] {
            prop_assert!(s.interior.iter().all(|p| p.t > 0.0 && p.t < d.t_max && p.x > d.x_lo && p.x < d.x_hi));
            prop_assert!(s.initial.iter().all(|p| p.t == 0.0 && p.x > d.x_lo && p.x < d.x_hi));
            prop_assert!(s.boundary.iter().all(|p| p.x == d.x_lo || p.x == d.x_hi));
        }
    }

    #[test]
    fn resample_rule_is_a_ratio_test(train in 0.0f64..10.0, val in 0.0f64..10.0) {
        prop_assert_eq!(should_resample(train, val).unwrap(), val > RESAMPLE_FACTOR * train);
    }

    #[test]
    fn learning_rate_decays_monotonically(a in 0u64..10_000, b in 0u64..10_000, budget in 1u64..10_000,
                                          initial in 1e-4f64..1.0, frac in 0.01f64..1.0) {
        let s = LrSchedule { initial, last: initial * frac };
        let (lo, hi) = (a.min(b).min(budget), a.max(b).min(budget));
        prop_assert!(s.at(lo, budget) >= s.at(hi, budget));
        prop_assert!(s.at(hi, budget) >= s.last * (1.0 - 1e-12));
        prop_assert!(s.at(lo, budget) <= s.initial * (1.0 + 1e-12));
    }

    #[test]
    fn median_ignores_run_order(curves in prop::collection::vec(prop::collection::vec(1e-6f64..1.0, 6), 1..7)
                                    .prop_shuffle()) {
        let logs: Vec<MetricsLog> = curves
            .iter()
            .map(|c| log_of(&c.iter().enumerate().map(|(k, &v)| (100 * k as u64, v)).collect::<Vec<_>>()))
            .collect();
        let mut reversed = logs.clone();
        reversed.reverse();
        let m = median_curve(&logs).unwrap();
        prop_assert_eq!(&m, &median_curve(&reversed).unwrap());
        for (k, &(_, v)) in m.iter().enumerate() {
            prop_assert!(curves.iter().any(|c| c[k] == v));
        }
    }

    #[test]
    fn looser_thresholds_are_reached_no_later(values in prop::collection::vec(1e-6f64..1.0, 1..50),
                                              a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
        let curve: Vec<(u64, f64)> = values.iter().enumerate().map(|(k, &v)| (100 * k as u64, v)).collect();
        let (tight, loose) = (a.min(b), a.max(b));
        match (epochs_to_reach(&curve, tight).epoch(), epochs_to_reach(&curve, loose).epoch()) {
            (Some(t), Some(l)) => prop_assert!(l <= t),
            (Some(_), None) => prop_assert!(false, "tight reached but loose not"),
            _ => {}
        }
    }

    #[test]
    fn success_ratio_is_a_fraction(mses in prop::collection::vec(prop::option::of(0.0f64..1.0), 1..30),
                                   threshold in 0.0f64..1.0) {
        let records: Vec<RunRecord> = mses.iter().enumerate().map(|(k, &m)| RunRecord {
            run_id: format!("r{k}"),
            cell_id: format!("c{k}"),
            group_id: "g".into(),
            kind: if k % 2 == 0 { ModelKind::Cpinn } else { ModelKind::Qpinn },
            family: "xsin".into(),
            l: 0.1,
            n: 1.0,
            target_params: 100,
            n_params: 100,
            n_points: 256,
            seed: k as u64,
            architecture: "d1w5".into(),
            status: if m.is_some() { "completed".into() } else { "diverged".into() },
            diverged_epoch: None,
            epochs_completed: 10,
            final_mse: m,
            representative: true,
        }).collect();
        let report = success_ratio(&records, threshold);
        prop_assert_eq!(report.groups.iter().map(|g| g.total).sum::<usize>(), records.len());
        for g in &report.groups {
            prop_assert!((0.0..=1.0).contains(&g.ratio));
            prop_assert!(g.successes <= g.total);
        }
    }

    #[test]
    fn checkpoints_round_trip(seed in any::<u64>(), depth in 1usize..4, width in 1usize..8, epoch in any::<u64>()) {
        let m = ModelHandle::init(ModelSpec::Dense(DenseSpec::uniform(2, width, depth, 1)), Some(100), seed).unwrap();
        let text = Checkpoint::from_model(&m, epoch).to_json();
        let back = Checkpoint::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        let model = back.into_model().unwrap();
        prop_assert_eq!(model.params.values(), m.params.values());
        prop_assert_eq!(model.eval(0.3, 0.7).to_bits(), m.eval(0.3, 0.7).to_bits());
    }

    #[test]
    fn reference_cache_round_trips(nt in 2usize..6, nx_half in 1usize..8, values in prop::collection::vec(-5.0f64..5.0, 90),
                                   l in 0.001f64..2.0, c in 0.1f64..3.0) {
        let nx = 2 * nx_half + 1;
        let sol = ReferenceSolution {
            times: (0..nt).map(|k| k as f64 / nt as f64).collect(),
            xs: (0..nx).map(|k| k as f64 / (nx - 1) as f64).collect(),
            values: values.iter().cycle().take(nt * nx).copied().collect(),
            problem: Some(PdeProblem::new(l, 1.0, BoundaryFamily::XSinC { c }).unwrap()),
            config: SolverConfig { nx, dt: 1e-3, save_every: 3 },
        };
        let bytes = encode(&sol).unwrap();
        let flat = ReferenceSolution { times: vec![0.0], values: sol.values[..nx].to_vec(), ..sol.clone() };
        prop_assert!(encode(&flat).is_err());
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back.times, &sol.times);
        prop_assert_eq!(&back.xs, &sol.xs);
        prop_assert_eq!(&back.values, &sol.values);
        prop_assert_eq!(back.problem, sol.problem);
        prop_assert_eq!(encode(&back).unwrap(), bytes);
    }

    #[test]
    fn metrics_csv_round_trips(rows in prop::collection::vec((1e-9f64..10.0, 1e-9f64..10.0, any::<bool>()), 1..20)) {
        let mut log = MetricsLog::default();
        for (k, &(mse, loss, rs)) in rows.iter().enumerate() {
            log.push(row(k as u64 * 3, mse, loss, rs)).unwrap();
        }
        let text = log.to_csv_string();
        let back = MetricsLog::parse_csv(&text).unwrap();
        prop_assert_eq!(&back.rows, &log.rows);
        prop_assert_eq!(back.to_csv_string(), text);
    }
}

/// Largest local discrepancy over anchored boxes whose corners lie on point
/// coordinates; a lower estimate of the star discrepancy, exact up to the grid.
fn star_discrepancy(points: &[[f64; 2]]) -> f64 {
    let n = points.len() as f64;
    let mut us: Vec<f64> = points.iter().map(|p| p[0]).chain([1.0]).collect();
    let mut vs: Vec<f64> = points.iter().map(|p| p[1]).chain([1.0]).collect();
    us.sort_by(f64::total_cmp);
    vs.sort_by(f64::total_cmp);
    let mut worst: f64 = 0.0;
    for &u in &us {
        for &v in &vs {
            let open = points.iter().filter(|p| p[0] < u && p[1] < v).count() as f64;
            let closed = points.iter().filter(|p| p[0] <= u && p[1] <= v).count() as f64;
            let vol = u * v;
            worst = worst.max(vol - open / n).max(closed / n - vol);
        }
    }
    worst
}

#[test]
fn sobol_prefix_has_low_discrepancy() {
    let mut s = SobolStream::new(2);
    let pts: Vec<[f64; 2]> = (0..255)
        .map(|_| {
            let p = s.next_point();
            [p[0], p[1]]
        })
        .chain([[0.0, 0.0]])
        .collect();
    let d = star_discrepancy(&pts);
    // 2·(ln N)²/N at N = 256
    let bound = 2.0 * (256f64.ln()).powi(2) / 256.0;
    assert!(d < bound, "discrepancy {d} vs bound {bound}");
    assert!(d < 0.02, "discrepancy {d}");
}

#[test]
fn jet_constants_have_no_derivatives() {
    let mut ar = ValueEval;
    let c = ar.constant(Jet2::constant(3.5));
    assert_eq!(c, 3.5);
    assert!(Jet2::constant(-2.0).is_constant());
}
