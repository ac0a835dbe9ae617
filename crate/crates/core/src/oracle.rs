//! Independent reference computations used to validate the main code paths.
//!
//! Nothing here shares an algorithm with what it checks: reduced rank
//! regression is checked against projected gradient descent from random
//! starts, and the integrator against the closed-form single-qubit
//! dephasing solution.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::matrix::{ComplexMatrix, C64};
use crate::error::Result;
use crate::koopman::rrr_objective;
use crate::lindblad::{dephasing_ops, integrate, LindbladModel, SpinChainParams};
use crate::par::Exec;

/// A random regression problem `y = M x + noise`.
#[derive(Debug, Clone)]
pub struct RrrInstance {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Vec<f64>>,
    pub rank: usize,
    pub reg: f64,
}

pub fn random_rrr_instance(seed: u64, dim: usize, n: usize, rank: usize, reg: f64) -> RrrInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..dim)
            .map(|i| {
                let clean: f64 = (0..dim).map(|j| m[(i, j)] * x[j]).sum();
                clean + 0.3 * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        xs.push(x);
        ys.push(y);
    }
    RrrInstance { xs, ys, rank, reg }
}

/// Best rank-`r` approximation via an SVD with explicitly sorted values.
fn project_rank(t: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let svd = t.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = DMatrix::zeros(t.nrows(), t.ncols());
    for &k in idx.iter().take(r) {
        out += u.column(k) * vt.row(k) * svd.singular_values[k];
    }
    out
}

#[derive(Debug, Clone)]
pub struct PgdResult {
    pub best_objective: f64,
    pub best: DMatrix<f64>,
    pub objectives: Vec<f64>,
}

/// Projected gradient descent on the rank-constrained objective from
/// `starts` random initializations; returns the best end point.
pub fn pgd_multistart(inst: &RrrInstance, starts: usize, seed: u64, exec: Exec) -> PgdResult {
    let d = inst.xs[0].len();
    let n = inst.xs.len() as f64;
    let x = DMatrix::from_fn(d, inst.xs.len(), |i, j| inst.xs[j][i]);
    let y = DMatrix::from_fn(d, inst.ys.len(), |i, j| inst.ys[j][i]);
    let cx = &x * x.transpose() / n + DMatrix::identity(d, d) * inst.reg;
    let cyx = &y * x.transpose() / n;
    let lip = 2.0 * cx.clone().symmetric_eigenvalues().max();
    let step = 1.0 / lip;

    let runs = exec.map_range(starts, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(s as u64));
        let init = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
        let mut t = project_rank(&init, inst.rank);
        let mut obj = rrr_objective(&t, &inst.xs, &inst.ys, inst.reg);
        for _ in 0..50_000 {
            let grad = (&t * &cx - &cyx) * 2.0;
            let next = project_rank(&(&t - grad * step), inst.rank);
            let next_obj = rrr_objective(&next, &inst.xs, &inst.ys, inst.reg);
            let done = (obj - next_obj).abs() <= 1e-15 * obj.abs().max(1.0);
            t = next;
            obj = next_obj;
            if done {
                break;
            }
        }
        (obj, t)
    });
    let objectives: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (best_objective, best) = runs
        .into_iter()
        .fold((f64::INFINITY, DMatrix::zeros(d, d)), |b, c| if c.0 < b.0 { c } else { b });
    PgdResult {
        best_objective,
        best,
        objectives,
    }
}

/// `rho_01(t) = rho_01(0) exp(-gamma t)` for pure dephasing `sqrt(gamma/2) Z`.
pub fn dephasing_coherence(rho01_initial: C64, gamma: f64, t: f64) -> C64 {
    rho01_initial * (-gamma * t).exp()
}

/// Integrates a single dephasing qubit from `|+><+|` and returns
/// `(t, simulated rho_01, closed form)` at the requested times.
pub fn single_qubit_dephasing(
    gamma: f64,
    dt: f64,
    substeps: usize,
    times: &[f64],
) -> Result<Vec<(f64, C64, C64)>> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let steps = ((t_max / dt).round() as usize).max(2);
    let params = SpinChainParams {
        n: 1,
        j_par: 0.0,
        j_perp: 0.0,
        gamma,
        dt,
        steps,
        substeps,
    };
    let model = LindbladModel::new(ComplexMatrix::zeros(2), dephasing_ops(1, gamma)?)?;
    let plus = ComplexMatrix::from_fn(2, |_, _| C64::from(0.5));
    let traj = integrate(&model, &plus, &params, "+")?;
    Ok(times
        .iter()
        .map(|&t| {
            let k = (t / dt).round() as usize;
            let rho = traj.density_matrix(k - 1);
            (t, rho[(0, 1)], dephasing_coherence(plus[(0, 1)], gamma, t))
        })
        .collect())
}
