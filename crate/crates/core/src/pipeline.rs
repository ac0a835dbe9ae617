//! The file-based workflow: simulate, fit, forecast, modes, symmetry.
//!
//! Every stage reads its inputs from and writes its artifact to
//! `RunConfig::output_dir`. The `derive_*` functions produce the artifact
//! text in memory; the `cmd_*` functions add file handling and a short
//! human-readable summary.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::algebra::{to_pauli_coeffs, ComplexMatrix};
use crate::config::{ObservableSpec, RunConfig};
use crate::error::{Error, Result};
use crate::koopman::{
    eigen_triplets, eigenfunction_drift, eigenfunction_operator, load_estimator, numerical_rank,
    spectral_summary, steady_mode_index, symmetry_residual, write_estimator, write_spectrum,
    EigenTriplet, FitInfo, KoopmanEstimator, SpectralSummary,
};
use crate::lindblad::{
    dataset_split, initial_state, integrate, load_trajectory, total_sz_op, write_trajectory,
    DatasetSplit, LindbladModel, Trajectory,
};
use crate::textio::{fmt_csv, fmt_exact, parse_f64};

pub const TRAJECTORY_FILE: &str = "trajectory.txt";
pub const ESTIMATOR_FILE: &str = "estimator.txt";
pub const FORECAST_FILE: &str = "forecast.csv";
pub const MODES_FILE: &str = "modes.csv";
pub const SYMMETRY_FILE: &str = "symmetry.txt";
pub const REPORT_FILE: &str = "report.json";

pub const FORECAST_HEADER: &str = "time,observable_id,truth,forecast";

/// Artifact name, the stage that writes it.
pub const ARTIFACTS: [(&str, &str); 5] = [
    (TRAJECTORY_FILE, "simulate"),
    (ESTIMATOR_FILE, "fit"),
    (FORECAST_FILE, "forecast"),
    (MODES_FILE, "modes"),
    (SYMMETRY_FILE, "symmetry"),
];

pub fn artifact_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

/// Fails with [`Error::MissingArtifact`] naming every absent artifact and the
/// stages that produce them.
pub fn require_artifacts(cfg: &RunConfig, names: &[&str]) -> Result<()> {
    let missing: Vec<(&str, &str)> = ARTIFACTS
        .iter()
        .copied()
        .filter(|(name, _)| names.contains(name) && !artifact_path(cfg, name).is_file())
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    let name = missing.iter().map(|m| m.0).collect::<Vec<_>>().join(", ");
    let stage = missing.iter().map(|m| m.1).collect::<Vec<_>>().join("`, `");
    Err(Error::MissingArtifact {
        name,
        stage,
        path: cfg.output_dir.clone(),
    })
}

fn load_traj(cfg: &RunConfig) -> Result<Trajectory> {
    require_artifacts(cfg, &[TRAJECTORY_FILE])?;
    load_trajectory(&artifact_path(cfg, TRAJECTORY_FILE))
}

fn load_est(cfg: &RunConfig) -> Result<KoopmanEstimator> {
    require_artifacts(cfg, &[ESTIMATOR_FILE])?;
    load_estimator(&artifact_path(cfg, ESTIMATOR_FILE))
}

fn to_text(body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = Vec::new();
    body(&mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("artifact text is ASCII")
}

fn save_text(path: &Path, text: &str) -> Result<()> {
    crate::textio::write_file(path, |w| w.write_all(text.as_bytes()))
}

fn say(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Real Pauli coefficients `f` with `tr(A rho) = f^T x(rho)`.
pub fn observable_vector(op: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(to_pauli_coeffs(op)?.real_parts())
}

/// Pauli coefficients of the initial density matrix.
pub fn initial_coefficients(label: &str) -> Result<Vec<f64>> {
    Ok(to_pauli_coeffs(&initial_state(label)?)?.real_parts())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------- simulate

/// Conservation diagnostics over all stored snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// `max_t |<S^z_tot>(t) - <S^z_tot>(0)|`.
    pub max_sz_drift: f64,
    /// `max_t |tr rho(t)^2 - tr rho(0)^2|`.
    pub max_purity_drift: f64,
}

pub fn diagnostics(traj: &Trajectory) -> Result<Diagnostics> {
    let n = traj.params.n;
    let x0 = initial_coefficients(&traj.initial_label)?;
    let sz = observable_vector(&total_sz_op(n))?;
    let sz0 = dot(&sz, &x0);
    let purity0 = dot(&x0, &x0);
    let per_snapshot = crate::Exec::default().map_range(traj.len(), |k| {
        let rho = traj.density_matrix(k);
        let x = &traj.states[k];
        (
            (rho.trace() - 1.0).norm(),
            rho.hermiticity_error(),
            rho.hermitian_eigenvalues()[0],
            (dot(&sz, x) - sz0).abs(),
            (dot(x, x) - purity0).abs(),
        )
    });
    let mut d = Diagnostics {
        max_trace_error: 0.0,
        max_hermiticity_error: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_sz_drift: 0.0,
        max_purity_drift: 0.0,
    };
    for (tr, herm, ev, sz, pur) in per_snapshot {
        d.max_trace_error = d.max_trace_error.max(tr);
        d.max_hermiticity_error = d.max_hermiticity_error.max(herm);
        d.min_eigenvalue = d.min_eigenvalue.min(ev);
        d.max_sz_drift = d.max_sz_drift.max(sz);
        d.max_purity_drift = d.max_purity_drift.max(pur);
    }
    Ok(d)
}

pub fn simulate(cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let model = LindbladModel::spin_chain(&cfg.params)?;
    let rho0 = initial_state(&cfg.initial_label)?;
    integrate(&model, &rho0, &cfg.params, &cfg.initial_label)
}

pub fn derive_trajectory_text(traj: &Trajectory) -> String {
    to_text(|w| write_trajectory(w, traj))
}

pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<PathBuf> {
    let traj = simulate(cfg)?;
    let d = diagnostics(&traj)?;
    let path = artifact_path(cfg, TRAJECTORY_FILE);
    save_text(&path, &derive_trajectory_text(&traj))?;
    say(
        out,
        &format!(
            "simulate: {} snapshots, t = {} .. {}\n\
             max |tr rho - 1|      = {:.3e}\n\
             max hermiticity error = {:.3e}\n\
             min eigenvalue        = {:.3e}\n\
             max S^z_tot drift     = {:.3e}\n\
             max purity drift      = {:.3e}\n\
             wrote {}\n",
            traj.len(),
            traj.times.first().copied().unwrap_or(0.0),
            traj.times.last().copied().unwrap_or(0.0),
            d.max_trace_error,
            d.max_hermiticity_error,
            d.min_eigenvalue,
            d.max_sz_drift,
            d.max_purity_drift,
            path.display()
        ),
    )?;
    Ok(path)
}

// --------------------------------------------------------------------- fit

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub estimator: KoopmanEstimator,
    pub info: FitInfo,
    pub split: DatasetSplit,
    /// Mean squared one-step error over the training pairs.
    pub training_residual: f64,
    pub numerical_rank: usize,
}

pub fn fit(traj: &Trajectory, cfg: &RunConfig) -> Result<FitOutcome> {
    let feature_dim = traj.params.feature_dim();
    if cfg.rank == 0 || cfg.rank > feature_dim {
        return Err(Error::Config(format!(
            "rank {} outside 1..={feature_dim}",
            cfg.rank
        )));
    }
    let split = dataset_split(traj, cfg.train_fraction)?;
    let (est, info) =
        crate::koopman::fit_rrr_with_info(&split.train_x, &split.train_y, cfg.rank, cfg.reg)?;
    let estimator = est.with_dt(traj.params.dt);
    let training_residual = estimator.training_residual(&split.train_x, &split.train_y);
    let numerical_rank = numerical_rank(&estimator);
    Ok(FitOutcome {
        estimator,
        info,
        split,
        training_residual,
        numerical_rank,
    })
}

pub fn derive_estimator_text(est: &KoopmanEstimator) -> String {
    to_text(|w| write_estimator(w, est))
}

pub fn cmd_fit(cfg: &RunConfig, out: &mut dyn Write) -> Result<PathBuf> {
    let traj = load_traj(cfg)?;
    let outcome = fit(&traj, cfg)?;
    let path = artifact_path(cfg, ESTIMATOR_FILE);
    save_text(&path, &derive_estimator_text(&outcome.estimator))?;
    let mut msg = format!(
        "fit: {} training pairs, rank {}, reg {:e}\n\
         training residual = {:.6e}\n\
         numerical rank    = {}\n",
        outcome.split.n_pairs(),
        cfg.rank,
        cfg.reg,
        outcome.training_residual,
        outcome.numerical_rank
    );
    if outcome.info.tie_at_cutoff {
        msg.push_str("warning: singular values tie at the rank cutoff; the rank-r solution is not unique\n");
    }
    msg.push_str(&format!("wrote {}\n", path.display()));
    say(out, &msg)?;
    Ok(path)
}

// ---------------------------------------------------------------- forecast

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    pub time: f64,
    pub observable_id: String,
    pub truth: f64,
    pub forecast: f64,
}

/// `(times, truth, forecast)` state sequences starting at `t = 0`.
pub type ForecastStates = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Forecast states on the full time axis: `t = 0` is the initial state,
/// training snapshots get the one-step prediction from the previous
/// snapshot, and test snapshots iterate the learned map from the last
/// training snapshot.
pub fn forecast_states(
    est: &KoopmanEstimator,
    traj: &Trajectory,
    train_len: usize,
) -> Result<ForecastStates> {
    if est.feature_dim() != traj.params.feature_dim() {
        return Err(Error::DimensionMismatch(format!(
            "estimator feature_dim {} but trajectory has {}",
            est.feature_dim(),
            traj.params.feature_dim()
        )));
    }
    let x0 = initial_coefficients(&traj.initial_label)?;
    let mut times = vec![0.0];
    let mut truth = vec![x0.clone()];
    let mut pred = vec![x0];
    let exec = crate::Exec::default();
    let one_step = exec.map_range(train_len, |k| {
        let prev = if k == 0 { &truth[0] } else { &traj.states[k - 1] };
        est.apply_with(prev, crate::Exec::Sequential)
    });
    pred.extend(one_step);
    let horizon = traj.len() - train_len;
    let seed = &traj.states[train_len - 1];
    pred.extend(est.forecast_series(seed, horizon).into_iter().skip(1));
    times.extend_from_slice(&traj.times);
    truth.extend(traj.states.iter().cloned());
    Ok((times, truth, pred))
}

pub fn forecast_rows(
    est: &KoopmanEstimator,
    traj: &Trajectory,
    cfg: &RunConfig,
) -> Result<Vec<ForecastRow>> {
    let split = dataset_split(traj, cfg.train_fraction)?;
    let (times, truth, pred) = forecast_states(est, traj, split.train_len)?;
    let obs: Vec<(String, Vec<f64>)> = cfg
        .observables
        .iter()
        .map(|o| Ok((o.id(), observable_vector(&o.operator(&traj.params)?)?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(times.len() * obs.len());
    for k in 0..times.len() {
        for (id, f) in &obs {
            rows.push(ForecastRow {
                time: times[k],
                observable_id: id.clone(),
                truth: dot(f, &truth[k]),
                forecast: dot(f, &pred[k]),
            });
        }
    }
    Ok(rows)
}

pub fn write_forecast_csv<W: Write + ?Sized>(w: &mut W, rows: &[ForecastRow]) -> std::io::Result<()> {
    writeln!(w, "{FORECAST_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_csv(r.time),
            r.observable_id,
            fmt_csv(r.truth),
            fmt_csv(r.forecast)
        )?;
    }
    Ok(())
}

pub fn read_forecast_csv(text: &str) -> Result<Vec<ForecastRow>> {
    const CTX: &str = "forecast csv";
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == FORECAST_HEADER => {}
        other => {
            return Err(Error::parse(
                CTX,
                format!("unexpected header {:?}", other.unwrap_or("")),
            ))
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return Err(Error::parse(CTX, format!("bad row '{l}'")));
            }
            Ok(ForecastRow {
                time: parse_f64(f[0], "time")?,
                observable_id: f[1].to_string(),
                truth: parse_f64(f[2], "truth")?,
                forecast: parse_f64(f[3], "forecast")?,
            })
        })
        .collect()
}

pub fn derive_forecast_text(est: &KoopmanEstimator, traj: &Trajectory, cfg: &RunConfig) -> Result<String> {
    let rows = forecast_rows(est, traj, cfg)?;
    Ok(to_text(|w| write_forecast_csv(w, &rows)))
}

pub fn cmd_forecast(cfg: &RunConfig, out: &mut dyn Write) -> Result<PathBuf> {
    let traj = load_traj(cfg)?;
    let est = load_est(cfg)?;
    let text = derive_forecast_text(&est, &traj, cfg)?;
    let path = artifact_path(cfg, FORECAST_FILE);
    save_text(&path, &text)?;
    let ids: Vec<String> = cfg.observables.iter().map(ObservableSpec::id).collect();
    say(
        out,
        &format!(
            "forecast: {} time points x {} observables ({})\nwrote {}\n",
            traj.len() + 1,
            ids.len(),
            ids.join(", "),
            path.display()
        ),
    )?;
    Ok(path)
}

// ------------------------------------------------------------------- modes

pub fn modes(est: &KoopmanEstimator) -> Result<(Vec<EigenTriplet>, SpectralSummary)> {
    let triplets = eigen_triplets(est)?;
    let summary = spectral_summary(&triplets, est.dt())?;
    Ok((triplets, summary))
}

pub fn derive_modes_text(summary: &SpectralSummary) -> String {
    to_text(|w| write_spectrum(w, summary))
}

pub fn cmd_modes(cfg: &RunConfig, out: &mut dyn Write) -> Result<PathBuf> {
    let est = load_est(cfg)?;
    let (_, summary) = modes(&est)?;
    let path = artifact_path(cfg, MODES_FILE);
    save_text(&path, &derive_modes_text(&summary))?;
    let mut msg = format!("modes: {} eigenvalues (dt = {})\n", summary.modes.len(), est.dt());
    msg.push_str("  idx       |lambda|     decay_rate     |frequency|\n");
    for m in &summary.modes {
        msg.push_str(&format!(
            "  {:>3}  {:>13.8}  {:>13.6e}  {:>13.6e}\n",
            m.index,
            m.abs,
            m.decay_rate,
            m.frequency.abs()
        ));
    }
    msg.push_str(&format!("wrote {}\n", path.display()));
    say(out, &msg)?;
    Ok(path)
}

// ---------------------------------------------------------------- symmetry

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOutcome {
    pub steady_index: usize,
    pub eigenvalue: crate::algebra::C64,
    /// `||[Psi_1, S^z_tot]||_F / (||Psi_1||_F ||S^z_tot||_F)`.
    pub residual: f64,
    /// Largest relative change of `psi_1` along the test snapshots.
    pub drift: f64,
}

pub fn symmetry(
    triplets: &[EigenTriplet],
    n: usize,
    test_states: &[Vec<f64>],
) -> Result<SymmetryOutcome> {
    let idx = steady_mode_index(triplets)
        .ok_or_else(|| Error::Numerical("estimator has no modes".into()))?;
    let steady = &triplets[idx];
    let psi = eigenfunction_operator(steady, n)?;
    let residual = symmetry_residual(&psi, &total_sz_op(n))?;
    Ok(SymmetryOutcome {
        steady_index: idx + 1,
        eigenvalue: steady.eigenvalue,
        residual,
        drift: eigenfunction_drift(steady, test_states),
    })
}

pub fn derive_symmetry_text(s: &SymmetryOutcome) -> String {
    format!(
        "steady_index = {}\nre_lambda = {}\nim_lambda = {}\nabs_lambda = {}\n\
         commutator_residual = {}\ntest_drift = {}\n",
        s.steady_index,
        fmt_exact(s.eigenvalue.re),
        fmt_exact(s.eigenvalue.im),
        fmt_exact(s.eigenvalue.norm()),
        fmt_exact(s.residual),
        fmt_exact(s.drift)
    )
}

pub fn cmd_symmetry(cfg: &RunConfig, out: &mut dyn Write) -> Result<PathBuf> {
    let traj = load_traj(cfg)?;
    let est = load_est(cfg)?;
    let (triplets, _) = modes(&est)?;
    let split = dataset_split(&traj, cfg.train_fraction)?;
    let s = symmetry(&triplets, traj.params.n, &split.test_states)?;
    let path = artifact_path(cfg, SYMMETRY_FILE);
    save_text(&path, &derive_symmetry_text(&s))?;
    say(
        out,
        &format!(
            "symmetry: steady mode {} with lambda = {:.8} {:+.3e}i\n\
             ||[Psi_1, S^z_tot]|| / (||Psi_1|| ||S^z_tot||) = {:.3e}\n\
             psi_1 drift over test data = {:.3e}\n\
             wrote {}\n",
            s.steady_index,
            s.eigenvalue.re,
            s.eigenvalue.im,
            s.residual,
            s.drift,
            path.display()
        ),
    )?;
    Ok(path)
}

/// All artifact texts of a run, derived in memory from the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedArtifacts {
    pub trajectory: String,
    pub estimator: String,
    pub forecast: String,
    pub modes: String,
    pub symmetry: String,
}

impl DerivedArtifacts {
    pub fn get(&self, name: &str) -> Option<&str> {
        match name {
            TRAJECTORY_FILE => Some(&self.trajectory),
            ESTIMATOR_FILE => Some(&self.estimator),
            FORECAST_FILE => Some(&self.forecast),
            MODES_FILE => Some(&self.modes),
            SYMMETRY_FILE => Some(&self.symmetry),
            _ => None,
        }
    }
}

pub fn derive_all(cfg: &RunConfig) -> Result<DerivedArtifacts> {
    let traj = simulate(cfg)?;
    let outcome = fit(&traj, cfg)?;
    let est = &outcome.estimator;
    let (triplets, summary) = modes(est)?;
    let sym = symmetry(&triplets, traj.params.n, &outcome.split.test_states)?;
    Ok(DerivedArtifacts {
        trajectory: derive_trajectory_text(&traj),
        estimator: derive_estimator_text(est),
        forecast: derive_forecast_text(est, &traj, cfg)?,
        modes: derive_modes_text(&summary),
        symmetry: derive_symmetry_text(&sym),
    })
}
