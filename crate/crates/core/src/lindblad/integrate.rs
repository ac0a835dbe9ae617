//! Fixed-step RK4 integration of the Lindblad equation and the resulting
//! trajectory dataset.

use super::model::{Generator, LindbladModel};
use super::params::SpinChainParams;
use crate::algebra::matrix::{ComplexMatrix, C64, ZERO};
use crate::algebra::{from_pauli_coeffs, to_pauli_coeffs_with, PauliCoefficients};
use crate::error::{Error, Result};
use crate::par::Exec;

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Product basis state `|s><s|` from per-site labels `u` (Z = +1) / `d` (Z = -1),
/// written either comma separated (`d,u,u`) or packed (`duu`).
pub fn initial_state(spec: &str) -> Result<ComplexMatrix> {
    let labels = parse_labels(spec)?;
    let n = labels.len();
    let index = labels
        .iter()
        .fold(0usize, |acc, &down| (acc << 1) | usize::from(down));
    let mut rho = ComplexMatrix::zeros(1 << n);
    rho[(index, index)] = C64::from(1.0);
    Ok(rho)
}

fn parse_labels(spec: &str) -> Result<Vec<bool>> {
    let tokens: Vec<&str> = if spec.contains(',') {
        spec.split(',').map(str::trim).collect()
    } else {
        spec.trim()
            .char_indices()
            .map(|(i, c)| &spec.trim()[i..i + c.len_utf8()])
            .collect()
    };
    let labels = tokens
        .iter()
        .map(|t| match t.to_ascii_lowercase().as_str() {
            "u" => Ok(false),
            "d" => Ok(true),
            other => Err(Error::parse(
                "initial_label",
                format!("expected 'u' or 'd', got '{other}'"),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    if labels.is_empty() {
        return Err(Error::parse("initial_label", "empty label"));
    }
    Ok(labels)
}

/// Time-ordered snapshots `t = k dt`, `k = 1..=steps`, stored as real
/// Pauli-basis coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: SpinChainParams,
    pub initial_label: String,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn coefficients(&self, k: usize) -> PauliCoefficients {
        PauliCoefficients::from_real(self.params.n, &self.states[k])
            .expect("trajectory state has 4^N entries")
    }

    pub fn density_matrix(&self, k: usize) -> ComplexMatrix {
        from_pauli_coeffs(&self.coefficients(k))
    }

    /// Re-checks the density-matrix invariants of every snapshot.
    pub fn validate(&self) -> Result<()> {
        let exec = Exec::default();
        exec.try_map_range(self.len(), |k| {
            check_density(&self.density_matrix(k), k + 1, self.times[k])
        })?;
        Ok(())
    }
}

/// Trace, hermiticity, and positivity check of one snapshot.
pub fn check_density(rho: &ComplexMatrix, snapshot: usize, time: f64) -> Result<()> {
    let fail = |detail: String| {
        Err(Error::InvariantViolation {
            snapshot,
            time,
            detail,
        })
    };
    if rho.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return fail("non-finite entries".into());
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > TRACE_TOL {
        return fail(format!("|tr rho - 1| = {:.3e}", (tr - 1.0).norm()));
    }
    let herm = rho.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return fail(format!("hermiticity error {herm:.3e}"));
    }
    let min_ev = rho.hermitian_eigenvalues()[0];
    if min_ev < -POSITIVITY_TOL {
        return fail(format!(
            "min eigenvalue {min_ev:.3e}; integrator step likely too coarse"
        ));
    }
    Ok(())
}

pub fn integrate(
    model: &LindbladModel,
    rho0: &ComplexMatrix,
    params: &SpinChainParams,
    initial_label: &str,
) -> Result<Trajectory> {
    integrate_with(model, rho0, params, initial_label, Exec::default())
}

/// Classical RK4 with `params.substeps` steps per snapshot interval.
///
/// The time loop is sequential; snapshot validation and conversion to Pauli
/// coordinates run on `exec`.
pub fn integrate_with(
    model: &LindbladModel,
    rho0: &ComplexMatrix,
    params: &SpinChainParams,
    initial_label: &str,
    exec: Exec,
) -> Result<Trajectory> {
    params.validate()?;
    if rho0.dim() != model.dim() || model.dim() != params.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {}, model dim {}, params expect {}",
            rho0.dim(),
            model.dim(),
            params.dim()
        )));
    }
    check_density(rho0, 0, 0.0)?;

    let gen = Generator::new(model)?;
    let n = gen.dim();
    let len = n * n;
    let h = params.dt / params.substeps as f64;
    let mut rho = rho0.as_slice().to_vec();
    let mut stage = vec![ZERO; len];
    let mut acc = vec![ZERO; len];
    let mut k = vec![ZERO; len];
    let mut scratch = vec![ZERO; len];

    let mut snapshots = Vec::with_capacity(params.steps);
    for step in 1..=params.steps {
        for _ in 0..params.substeps {
            // k1
            gen.apply(&rho, &mut k, &mut scratch);
            for i in 0..len {
                acc[i] = k[i];
                stage[i] = rho[i] + k[i] * (0.5 * h);
            }
            // k2
            gen.apply(&stage, &mut k, &mut scratch);
            for i in 0..len {
                acc[i] += k[i] * 2.0;
                stage[i] = rho[i] + k[i] * (0.5 * h);
            }
            // k3
            gen.apply(&stage, &mut k, &mut scratch);
            for i in 0..len {
                acc[i] += k[i] * 2.0;
                stage[i] = rho[i] + k[i] * h;
            }
            // k4
            gen.apply(&stage, &mut k, &mut scratch);
            for i in 0..len {
                rho[i] += (acc[i] + k[i]) * (h / 6.0);
            }
        }
        let time = step as f64 * params.dt;
        let snap = ComplexMatrix::from_row_major(rho.clone())?;
        let tr_err = (snap.trace() - 1.0).norm();
        if !tr_err.is_finite() || tr_err > TRACE_TOL {
            return Err(Error::InvariantViolation {
                snapshot: step,
                time,
                detail: format!("|tr rho - 1| = {tr_err:.3e}; integrator step likely too coarse"),
            });
        }
        snapshots.push(snap);
    }

    let times: Vec<f64> = (1..=params.steps).map(|s| s as f64 * params.dt).collect();
    let states = exec.try_map_range(snapshots.len(), |k| -> Result<Vec<f64>> {
        check_density(&snapshots[k], k + 1, times[k])?;
        let c = to_pauli_coeffs_with(&snapshots[k], Exec::Sequential)?;
        Ok(c.real_parts())
    })?;

    Ok(Trajectory {
        params: *params,
        initial_label: initial_label.to_string(),
        times,
        states,
    })
}

/// Training pairs from the leading part of a trajectory plus the untouched
/// test segment.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    /// Number of snapshots in the training prefix.
    pub train_len: usize,
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<Vec<f64>>,
    pub test_times: Vec<f64>,
    pub test_states: Vec<Vec<f64>>,
}

impl DatasetSplit {
    pub fn n_pairs(&self) -> usize {
        self.train_x.len()
    }
}

/// The first `ceil(fraction * len)` snapshots form consecutive pairs
/// `(x_k, x_{k+1})`; the rest is the test segment.
pub fn dataset_split(traj: &Trajectory, train_fraction: f64) -> Result<DatasetSplit> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let total = traj.len();
    let train_len = ((total as f64 * train_fraction) - 1e-9).ceil().max(0.0) as usize;
    let train_len = train_len.min(total);
    if train_len < 2 {
        return Err(Error::InvalidParameter(format!(
            "training prefix has {train_len} snapshot(s); at least 2 are needed"
        )));
    }
    let prefix = &traj.states[..train_len];
    Ok(DatasetSplit {
        train_len,
        train_x: prefix[..train_len - 1].to_vec(),
        train_y: prefix[1..].to_vec(),
        test_times: traj.times[train_len..].to_vec(),
        test_states: traj.states[train_len..].to_vec(),
    })
}
