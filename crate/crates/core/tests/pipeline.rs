use std::sync::OnceLock;

use koopspin::algebra::{to_pauli_coeffs, PauliString};
use koopspin::config::{ObservableSpec, RunConfig};
use koopspin::koopman::{eigen_triplets, KoopmanEstimator};
use koopspin::lindblad::{read_trajectory, total_sz_op, Trajectory};
use koopspin::pipeline::{
    cmd_fit, cmd_simulate, derive_trajectory_text, diagnostics, fit, forecast_rows,
    forecast_states, modes, simulate, symmetry, FitOutcome,
};
use koopspin::{report, Error};
use nalgebra::DMatrix;

struct DefaultRun {
    cfg: RunConfig,
    traj: Trajectory,
    fit: FitOutcome,
}

fn default_run() -> &'static DefaultRun {
    static RUN: OnceLock<DefaultRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = RunConfig::default();
        let traj = simulate(&cfg).unwrap();
        let fit = fit(&traj, &cfg).unwrap();
        DefaultRun { cfg, traj, fit }
    })
}

#[test]
fn default_trajectory_has_200_snapshots_and_round_trips() {
    let run = default_run();
    assert_eq!(run.traj.len(), 200);
    assert_eq!(run.traj.times[0], 0.5);
    assert_eq!(run.traj.times[199], 100.0);
    let text = derive_trajectory_text(&run.traj);
    assert_eq!(read_trajectory(text.as_bytes()).unwrap(), run.traj);
}

#[test]
fn minimal_two_step_run() {
    let mut cfg = RunConfig::default();
    cfg.set("steps", "2").unwrap();
    let traj = simulate(&cfg).unwrap();
    assert_eq!(traj.len(), 2);
    assert_eq!(traj.times, vec![0.5, 1.0]);
}

#[test]
fn closed_system_purity_drift_is_tiny() {
    let mut cfg = RunConfig::default();
    cfg.set("gamma", "0").unwrap();
    let d = diagnostics(&simulate(&cfg).unwrap()).unwrap();
    assert!(d.max_purity_drift <= 1e-8, "{d:?}");
}

#[test]
fn default_fit_has_numerical_rank_19() {
    let run = default_run();
    assert_eq!(run.fit.split.n_pairs(), 99);
    assert_eq!(run.fit.numerical_rank, 19);
    assert!(!run.fit.info.tie_at_cutoff);
}

#[test]
fn lower_rank_or_stronger_regularization_fits_worse() {
    let run = default_run();
    let with = |key: &str, value: &str| {
        let mut cfg = run.cfg.clone();
        cfg.set(key, value).unwrap();
        fit(&run.traj, &cfg).unwrap().training_residual
    };
    let base = run.fit.training_residual;
    assert!(with("rank", "1") > base);
    assert!(with("reg", "1e-2") > base);
}

#[test]
fn training_rows_reproduce_in_sample_residual() {
    let run = default_run();
    let split = &run.fit.split;
    let (_, truth, pred) = forecast_states(&run.fit.estimator, &run.traj, split.train_len).unwrap();
    // indices 2..=train_len hold predictions from stored training snapshots
    let mse: f64 = (2..=split.train_len)
        .map(|k| {
            truth[k]
                .iter()
                .zip(&pred[k])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        })
        .sum::<f64>()
        / split.n_pairs() as f64;
    let r = run.fit.training_residual;
    assert!((mse - r).abs() <= 1e-9 * r, "{mse} vs {r}");
}

#[test]
fn forecast_initial_values() {
    let run = default_run();
    let rows = forecast_rows(&run.fit.estimator, &run.traj, &run.cfg).unwrap();
    assert_eq!(rows.len(), 201 * 3);
    let at = |id: &str| rows.iter().find(|r| r.time == 0.0 && r.observable_id == id).unwrap();
    assert!((at("polarization_1").truth + 0.5).abs() < 1e-15);
    assert!((at("polarization_5").truth - 0.5).abs() < 1e-15);
    assert!(at("current_3").truth.abs() < 1e-15);
    assert_eq!(at("current_3").forecast, at("current_3").truth);
}

#[test]
fn test_window_forecast_iterates_from_last_training_snapshot() {
    let run = default_run();
    let est = &run.fit.estimator;
    let split = &run.fit.split;
    let (_, _, pred) = forecast_states(est, &run.traj, split.train_len).unwrap();
    let seed = &run.traj.states[split.train_len - 1];
    assert_eq!(pred[split.train_len + 1], est.apply(seed));
    assert_eq!(pred[split.train_len + 3], est.forecast_state(seed, 3));
}

#[test]
fn default_spectrum() {
    let run = default_run();
    let (_, summary) = modes(&run.fit.estimator).unwrap();
    assert_eq!(summary.modes.len(), 19);
    for w in summary.modes.windows(2) {
        assert!(w[0].abs >= w[1].abs);
    }
    assert!((0.9965..=0.9995).contains(&summary.modes[0].abs));
    for m in &summary.modes {
        assert!((0.0..=1.0).contains(&m.frequency.abs()));
    }
}

#[test]
fn steady_mode_commutes_and_drifts_within_its_decay_bound() {
    let run = default_run();
    let triplets = eigen_triplets(&run.fit.estimator).unwrap();
    let s = symmetry(&triplets, 5, &run.fit.split.test_states).unwrap();
    assert!(s.residual <= 0.05);
    // psi_1 decays like |lambda_1|^t along the 100 test snapshots
    let bound = 1.0 - s.eigenvalue.norm().powi(run.fit.split.test_states.len() as i32);
    assert!(s.drift <= bound, "drift {} vs bound {bound}", s.drift);
}

#[test]
fn injected_total_sz_eigenfunction_has_zero_residual() {
    let n = 2;
    let sz = to_pauli_coeffs(&total_sz_op(n)).unwrap().real_parts();
    let norm2: f64 = sz.iter().map(|v| v * v).sum();
    let x1: Vec<f64> = (0..16)
        .map(|i| if PauliString::from_index(i, n).to_string() == "XI" { 1.0 } else { 0.0 })
        .collect();
    // T = 0.999 P_sz + 0.5 P_x1 with both projectors rank one
    let t = DMatrix::from_fn(16, 16, |i, j| 0.999 * sz[i] * sz[j] / norm2 + 0.5 * x1[i] * x1[j]);
    let est = KoopmanEstimator::from_matrix(&t, 2, 1e-6, 0.5).unwrap();
    let triplets = eigen_triplets(&est).unwrap();
    let s = symmetry(&triplets, n, &[]).unwrap();
    assert!((s.eigenvalue.re - 0.999).abs() < 1e-14);
    assert!(s.residual <= 1e-15, "{}", s.residual);
}

#[test]
fn report_names_the_missing_fit_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.apply_overrides(&["N=2", "initial_label=d,u", "steps=10", "rank=3"])
        .unwrap();
    cfg.observables = vec![ObservableSpec::polarization(1)];
    cfg.output_dir = dir.path().to_path_buf();
    let mut sink = Vec::new();
    cmd_simulate(&cfg, &mut sink).unwrap();
    let err = report::evaluate(&cfg).unwrap_err();
    match &err {
        Error::MissingArtifact { name, stage, .. } => {
            assert!(name.contains("estimator.txt"));
            assert!(stage.contains("fit"));
        }
        other => panic!("unexpected {other}"),
    }
    cmd_fit(&cfg, &mut sink).unwrap();
    let err = report::evaluate(&cfg).unwrap_err().to_string();
    assert!(err.contains("forecast.csv") && !err.contains("estimator.txt"), "{err}");
}
