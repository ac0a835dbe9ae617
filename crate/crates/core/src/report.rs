//! Consolidated machine-readable report over the artifacts of a run.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use crate::config::{ObservableSpec, RunConfig};
use crate::error::{Error, Result};
use crate::koopman::{fit_rrr, load_estimator, mode_decomposition, rrr_objective, steady_mode_index};
use crate::lindblad::{dataset_split, load_trajectory};
use crate::oracle::{pgd_multistart, random_rrr_instance, single_qubit_dephasing};
use crate::pipeline::{
    artifact_path, derive_all, diagnostics, forecast_states, modes, observable_vector,
    require_artifacts, symmetry, ARTIFACTS, ESTIMATOR_FILE, REPORT_FILE, TRAJECTORY_FILE,
};

/// One acceptance check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub j_par: f64,
    pub j_perp: f64,
    pub gamma: f64,
    pub dt: f64,
    pub steps: usize,
    pub substeps: usize,
    pub initial_label: String,
    pub train_fraction: f64,
    pub rank: usize,
    pub reg: f64,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        let p = &c.params;
        Self {
            n: p.n,
            j_par: p.j_par,
            j_perp: p.j_perp,
            gamma: p.gamma,
            dt: p.dt,
            steps: p.steps,
            substeps: p.substeps,
            initial_label: c.initial_label.clone(),
            train_fraction: c.train_fraction,
            rank: c.rank,
            reg: c.reg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub criteria: Vec<Criterion>,
    pub passed: usize,
    pub total: usize,
    pub all_pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One `PASS`/`FAIL` line per criterion.
    pub fn summary_lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                format!(
                    "[{}] {:>2} {:<24} value = {:<12.6e} threshold {}  {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.value,
                    c.threshold,
                    c.detail
                )
            })
            .collect()
    }
}

/// Polarization at both chain ends and the current at the central site.
pub fn figure_observables(n: usize) -> [ObservableSpec; 3] {
    [
        ObservableSpec::polarization(1),
        ObservableSpec::polarization(n),
        ObservableSpec::current(n.div_ceil(2)),
    ]
}

fn criterion(id: u32, name: &str, value: f64, threshold: &str, pass: bool, detail: String) -> Criterion {
    Criterion {
        id,
        name: name.to_string(),
        value,
        threshold: threshold.to_string(),
        pass,
        detail,
    }
}

const STEADY_ABS: (f64, f64) = (0.9965, 0.9995);
const STEADY_RATE: (f64, f64) = (0.001, 0.007);
const BULK_RATE: (f64, f64) = (0.015, 0.025);
const BULK_MIN_COUNT: usize = 14;
const FREQ_RANGE: (f64, f64) = (0.03, 0.25);
/// Frequencies at or below this are treated as zero (real eigenvalues).
const ZERO_FREQ: f64 = 1e-9;
const SYMMETRY_MAX: f64 = 0.05;
const CURRENT_RMSE_MAX: f64 = 0.15;
const CURRENT_WINDOW: usize = 40;
const POLARIZATION_ERR_MAX: f64 = 0.05;
const POLARIZATION_WINDOW: usize = 20;
const SZ_DRIFT_MAX: f64 = 1e-8;
const DEPHASING_TOL: f64 = 1e-6;
const DEPHASING_GAMMA: f64 = 0.01;
const DEPHASING_TIMES: [f64; 3] = [10.0, 50.0, 100.0];
const RRR_INSTANCES: u64 = 20;
const RRR_STARTS: usize = 50;
const RRR_TOL: f64 = 1e-6;
const RRR_REG: f64 = 1e-2;
const MODE_HORIZON: usize = 100;
const MODE_TOL: f64 = 1e-8;

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

/// Evaluates every acceptance criterion from the artifacts in `output_dir`.
pub fn evaluate(cfg: &RunConfig) -> Result<Report> {
    let names: Vec<&str> = ARTIFACTS.iter().map(|a| a.0).collect();
    require_artifacts(cfg, &names)?;
    let traj = load_trajectory(&artifact_path(cfg, TRAJECTORY_FILE))?;
    let est = load_estimator(&artifact_path(cfg, ESTIMATOR_FILE))?;
    let n = traj.params.n;
    let split = dataset_split(&traj, cfg.train_fraction)?;
    let (triplets, summary) = modes(&est)?;
    let steady = steady_mode_index(&triplets)
        .ok_or_else(|| Error::Numerical("estimator has no modes".into()))?;
    let steady_mode = summary.modes[steady];
    let mut out = Vec::with_capacity(12);

    out.push(criterion(
        1,
        "steady_eigenvalue",
        steady_mode.abs,
        "|lambda_1| in [0.9965, 0.9995]",
        in_range(steady_mode.abs, STEADY_ABS),
        format!("mode {} of {}", steady_mode.index, summary.modes.len()),
    ));
    out.push(criterion(
        2,
        "steady_decay_rate",
        steady_mode.decay_rate,
        "in [0.001, 0.007]",
        in_range(steady_mode.decay_rate, STEADY_RATE),
        String::new(),
    ));

    let bulk = summary
        .modes
        .iter()
        .filter(|m| in_range(m.decay_rate, BULK_RATE))
        .count();
    out.push(criterion(
        3,
        "bulk_decay_rates",
        bulk as f64,
        ">= 14 modes with rate in [0.015, 0.025]",
        bulk >= BULK_MIN_COUNT,
        format!("{bulk} of {} modes", summary.modes.len()),
    ));

    let oscillating: Vec<f64> = summary
        .modes
        .iter()
        .map(|m| m.frequency.abs())
        .filter(|&w| w > ZERO_FREQ)
        .collect();
    let outside = oscillating.iter().filter(|&&w| !in_range(w, FREQ_RANGE)).count();
    let (wmin, wmax) = oscillating
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &w| (a.min(w), b.max(w)));
    out.push(criterion(
        4,
        "frequencies",
        outside as f64,
        "0 nonzero |omega| outside [0.03, 0.25]",
        outside == 0,
        format!(
            "{} oscillating modes, |omega| in [{wmin:.4e}, {wmax:.4e}]",
            oscillating.len()
        ),
    ));

    let sym = symmetry(&triplets, n, &split.test_states)?;
    out.push(criterion(
        5,
        "symmetry_residual",
        sym.residual,
        "<= 0.05",
        sym.residual <= SYMMETRY_MAX,
        format!("steady-mode drift over test data {:.3e}", sym.drift),
    ));

    // Forecast quality on the Figure-1 observables.
    let fig = figure_observables(n);
    let fvecs: Vec<Vec<f64>> = fig
        .iter()
        .map(|o| observable_vector(&o.operator(&traj.params)?))
        .collect::<Result<_>>()?;
    let (_, truth, pred) = forecast_states(&est, &traj, split.train_len)?;
    let first_test = split.train_len + 1;
    let window = |len: usize| first_test..(first_test + len).min(truth.len());

    let cur = &fvecs[2];
    let (mut se, mut ss, mut count) = (0.0, 0.0, 0usize);
    for k in window(CURRENT_WINDOW) {
        let t = dot(cur, &truth[k]);
        let p = dot(cur, &pred[k]);
        se += (p - t).powi(2);
        ss += t * t;
        count += 1;
    }
    let rel_rmse = if ss > 0.0 { (se / ss).sqrt() } else { f64::INFINITY };
    out.push(criterion(
        6,
        "current_forecast",
        rel_rmse,
        "relative RMSE <= 0.15 over 40 test steps",
        count == CURRENT_WINDOW && rel_rmse <= CURRENT_RMSE_MAX,
        format!("{} over {count} steps", fig[2].id()),
    ));

    let mut pol_err = 0.0f64;
    let mut count = 0;
    for k in window(POLARIZATION_WINDOW) {
        for f in &fvecs[..2] {
            pol_err = pol_err.max((dot(f, &pred[k]) - dot(f, &truth[k])).abs());
        }
        count += 1;
    }
    out.push(criterion(
        7,
        "polarization_forecast",
        pol_err,
        "max abs error <= 0.05 over 20 test steps",
        count == POLARIZATION_WINDOW && pol_err <= POLARIZATION_ERR_MAX,
        format!("{} and {} over {count} steps", fig[0].id(), fig[1].id()),
    ));

    let d = diagnostics(&traj)?;
    let conserved = d.max_trace_error <= crate::lindblad::TRACE_TOL
        && d.max_hermiticity_error <= crate::lindblad::HERMITICITY_TOL
        && d.min_eigenvalue >= -crate::lindblad::POSITIVITY_TOL
        && d.max_sz_drift <= SZ_DRIFT_MAX;
    out.push(criterion(
        8,
        "conservation",
        d.max_sz_drift,
        "trace 1e-9, hermiticity 1e-10, min eig -1e-8, S^z_tot 1e-8",
        conserved,
        format!(
            "trace {:.2e}, hermiticity {:.2e}, min eig {:.2e}, S^z_tot drift {:.2e} over {} snapshots",
            d.max_trace_error,
            d.max_hermiticity_error,
            d.min_eigenvalue,
            d.max_sz_drift,
            traj.len()
        ),
    ));

    let deph = single_qubit_dephasing(
        DEPHASING_GAMMA,
        traj.params.dt,
        traj.params.substeps,
        &DEPHASING_TIMES,
    )?;
    let deph_err = deph
        .iter()
        .map(|(_, sim, exact)| (sim - exact).norm())
        .fold(0.0, f64::max);
    out.push(criterion(
        9,
        "dephasing_oracle",
        deph_err,
        "max |rho_01 - exact| <= 1e-6",
        deph_err <= DEPHASING_TOL,
        "t in {10, 50, 100}".to_string(),
    ));

    let (gap, worst) = rrr_vs_pgd()?;
    out.push(criterion(
        10,
        "rrr_optimality",
        gap,
        "|obj(fit_rrr) - obj(pgd)| <= 1e-6",
        gap <= RRR_TOL && worst <= RRR_TOL,
        format!(
            "{RRR_INSTANCES} instances, {RRR_STARTS} starts; max obj(fit_rrr) - obj(pgd) = {worst:.3e}"
        ),
    ));

    let x0 = &traj.states[split.train_len - 1];
    let mut mode_err = 0.0f64;
    for f in &fvecs {
        let dec = mode_decomposition(&triplets, f, x0);
        let mut x = x0.clone();
        for t in 0..=MODE_HORIZON {
            if t > 0 {
                x = est.apply(&x);
            }
            mode_err = mode_err.max((dec.reconstruct(t) - dot(f, &x)).norm());
        }
    }
    out.push(criterion(
        11,
        "mode_forecast_identity",
        mode_err,
        "<= 1e-8 for t in 0..=100",
        mode_err <= MODE_TOL,
        "Figure-1 observables from the last training snapshot".to_string(),
    ));

    let derived = derive_all(cfg)?;
    let mut differing = Vec::new();
    for (name, _) in ARTIFACTS {
        let path = artifact_path(cfg, name);
        let on_disk = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if derived.get(name).map(str::as_bytes) != Some(on_disk.as_slice()) {
            differing.push(name);
        }
    }
    out.push(criterion(
        12,
        "determinism",
        differing.len() as f64,
        "0 artifacts differ on re-derivation",
        differing.is_empty(),
        if differing.is_empty() {
            "all artifacts byte-identical".to_string()
        } else {
            format!("differing: {}", differing.join(", "))
        },
    ));

    let passed = out.iter().filter(|c| c.pass).count();
    Ok(Report {
        config: cfg.into(),
        total: out.len(),
        passed,
        all_pass: passed == out.len(),
        criteria: out,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(max |gap|, max signed gap)` between the closed form and the oracle.
fn rrr_vs_pgd() -> Result<(f64, f64)> {
    let mut gap = 0.0f64;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..RRR_INSTANCES {
        let rank = 1 + (seed % 2) as usize;
        let inst = random_rrr_instance(seed, 4, 20, rank, RRR_REG);
        let est = fit_rrr(&inst.xs, &inst.ys, rank, RRR_REG)?;
        let closed = rrr_objective(&est.to_matrix(), &inst.xs, &inst.ys, RRR_REG);
        let pgd = pgd_multistart(&inst, RRR_STARTS, seed, crate::Exec::default());
        gap = gap.max((closed - pgd.best_objective).abs());
        worst = worst.max(closed - pgd.best_objective);
    }
    Ok((gap, worst))
}

pub fn cmd_report(cfg: &RunConfig, out: &mut dyn Write) -> Result<PathBuf> {
    let report = evaluate(cfg)?;
    let path = artifact_path(cfg, REPORT_FILE);
    crate::textio::write_file(&path, |w| w.write_all(report.to_json().as_bytes()))?;
    let mut msg = report.summary_lines().join("\n");
    msg.push_str(&format!(
        "\n{}/{} criteria passed\nwrote {}\n",
        report.passed,
        report.total,
        path.display()
    ));
    out.write_all(msg.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    Ok(path)
}
