//! Eigen-triplets of the learned operator and the quantities derived from
//! them: mode decomposition, decay rates, frequencies, steady mode, and
//! operator-valued eigenfunctions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::rrr::{dot, sorted_svd, KoopmanEstimator};
use crate::algebra::matrix::{ComplexMatrix, C64};
use crate::algebra::{commutator, frobenius_norm, from_pauli_coeffs, PauliCoefficients};
use crate::error::{Error, Result};
use crate::par::Exec;

/// Columns whose residual norm falls below this fraction of the largest
/// column norm are treated as numerically zero.
const RANGE_TOL: f64 = 1e-12;
/// Eigenvector matrices with a larger condition number are reported as defective.
const MAX_EIGVEC_COND: f64 = 1e10;
const EIG_RESIDUAL_TOL: f64 = 1e-8;

/// One mode of the learned operator.
///
/// `right` holds the coefficients of the right eigenfunction
/// `psi(x) = right^T x` (a left eigenvector of `T`); `left` is the dual
/// vector with `<left_i, right_j> = delta_ij` (conjugate-linear in `left`),
/// so `conj(left)` is the matching right eigenvector of `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriplet {
    pub eigenvalue: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

impl EigenTriplet {
    /// `psi(x) = sum_k right_k x_k`.
    pub fn eval(&self, x: &[f64]) -> C64 {
        self.right.iter().zip(x).map(|(p, v)| p * v).sum()
    }

    /// `<left, f> = sum_k conj(left_k) f_k`.
    pub fn amplitude(&self, f: &[f64]) -> C64 {
        self.left.iter().zip(f).map(|(l, v)| l.conj() * v).sum()
    }
}

/// Orthonormal basis `Q` of `range(T)` found by column-pivoted Gram-Schmidt,
/// together with `B = Q^T T` so that `T = Q B`.
#[derive(Debug, Clone)]
pub struct RangeFactor {
    pub basis: DMatrix<f64>,
    pub coeffs: DMatrix<f64>,
}

pub fn range_factor(t: &DMatrix<f64>, max_cols: usize) -> RangeFactor {
    let d = t.nrows();
    let mut resid = t.clone();
    let scale = (0..t.ncols()).map(|j| t.column(j).norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while basis.len() < max_cols.min(d) {
        let (p, norm) = (0..resid.ncols())
            .map(|j| (j, resid.column(j).norm()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if scale == 0.0 || norm <= RANGE_TOL * scale {
            break;
        }
        let mut q = resid.column(p) / norm;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&q);
                q.axpy(-c, b, 1.0);
            }
            let qn = q.norm();
            q /= qn;
        }
        let proj = q.transpose() * &resid;
        resid -= &q * proj;
        basis.push(q);
    }
    let k = basis.len();
    let q = DMatrix::from_fn(d, k, |i, j| basis[j][i]);
    let coeffs = q.transpose() * t;
    RangeFactor { basis: q, coeffs }
}

/// Singular values above `1e-10 * sigma_1` of `T`.
pub fn numerical_rank(est: &KoopmanEstimator) -> usize {
    let t = est.to_matrix();
    let f = range_factor(&t, est.feature_dim());
    if f.coeffs.nrows() == 0 {
        return 0;
    }
    let sv = f.coeffs.singular_values();
    let s1 = sv.max();
    sv.iter().filter(|&&s| s > 1e-10 * s1).count()
}

fn null_vector_real(a: &DMatrix<f64>, lambda: f64) -> Result<DVector<C64>> {
    let k = a.nrows();
    let shifted = a - DMatrix::identity(k, k) * lambda;
    let (_, s, v) = sorted_svd(shifted)?;
    let col = v.column(s.len() - 1);
    Ok(DVector::from_iterator(k, col.iter().map(|&x| C64::from(x))))
}

fn null_vector_complex(a: &DMatrix<f64>, lambda: C64) -> Result<DVector<C64>> {
    let k = a.nrows();
    let shifted = a.map(C64::from) - DMatrix::<C64>::identity(k, k) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return V^H".into()))?;
    let idx = svd.singular_values.imin();
    Ok(vt.row(idx).transpose().map(|z| z.conj()))
}

/// Eigenvalues of a real matrix with conjugate pairs made exact, sorted by
/// modulus descending (positive imaginary part first within a pair).
fn paired_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<C64>> {
    let raw: Vec<C64> = a.complex_eigenvalues().iter().copied().collect();
    let mut out: Vec<C64> = raw.iter().filter(|z| z.im == 0.0).copied().collect();
    let mut upper: Vec<C64> = raw.iter().filter(|z| z.im > 0.0).copied().collect();
    let mut lower: Vec<C64> = raw.iter().filter(|z| z.im < 0.0).copied().collect();
    if upper.len() != lower.len() {
        return Err(Error::Numerical(
            "complex eigenvalues of a real matrix do not pair up".into(),
        ));
    }
    upper.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for z in upper {
        let (j, dist) = lower
            .iter()
            .enumerate()
            .map(|(j, w)| (j, (w - z.conj()).norm()))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if dist > 1e-8 * z.norm().max(1.0) {
            return Err(Error::Numerical(format!(
                "no conjugate partner for eigenvalue {z}"
            )));
        }
        lower.swap_remove(j);
        out.push(z);
        out.push(z.conj());
    }
    out.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
    Ok(out)
}

pub fn eigen_triplets(est: &KoopmanEstimator) -> Result<Vec<EigenTriplet>> {
    eigen_triplets_with(est, Exec::default())
}

/// Eigendecomposition of `T` restricted to its range.
///
/// `T = Q B` with orthonormal `Q`; the compression `A = B Q` (at most
/// `rank x rank`) carries every nonzero eigenvalue. Right eigenvectors `a`
/// of `A` lift to `v = Q a`, left ones `b` to `w = B^T b / lambda`.
pub fn eigen_triplets_with(est: &KoopmanEstimator, exec: Exec) -> Result<Vec<EigenTriplet>> {
    let t = est.to_matrix();
    let factor = range_factor(&t, est.rank());
    let k = factor.basis.ncols();
    if k == 0 {
        return Err(Error::Numerical("learned operator is identically zero".into()));
    }
    let a = &factor.coeffs * &factor.basis;
    let a_norm = a.norm();
    let lambdas = paired_eigenvalues(&a)?;
    if let Some(z) = lambdas.iter().find(|z| z.norm() <= 1e-13 * a_norm) {
        return Err(Error::Numerical(format!(
            "zero eigenvalue {z} inside the learned range; rank is lower than {k}"
        )));
    }

    // Right eigenvectors of A; conjugate partners reuse the upper member.
    let vecs: Vec<Option<DVector<C64>>> = exec.try_map_range(k, |i| -> Result<_> {
        let z = lambdas[i];
        if z.im < 0.0 {
            return Ok(None);
        }
        let v = if z.im == 0.0 {
            null_vector_real(&a, z.re)?
        } else {
            null_vector_complex(&a, z)?
        };
        Ok(Some(v))
    })?;
    let mut right_a: Vec<DVector<C64>> = Vec::with_capacity(k);
    for (i, v) in vecs.into_iter().enumerate() {
        match v {
            Some(v) => right_a.push(v),
            None => {
                let j = (0..i)
                    .find(|&j| lambdas[j] == lambdas[i].conj())
                    .ok_or_else(|| Error::Numerical("unpaired conjugate eigenvalue".into()))?;
                let partner = right_a[j].map(|z| z.conj());
                right_a.push(partner);
            }
        }
    }

    let ac = a.map(C64::from);
    for (i, v) in right_a.iter().enumerate() {
        let res = (&ac * v - v * lambdas[i]).norm();
        if res > EIG_RESIDUAL_TOL * lambdas[i].norm().max(a_norm * 1e-3) {
            return Err(Error::Defective(format!(
                "eigenvector residual {res:.3e} for eigenvalue {} did not reach the floor",
                lambdas[i]
            )));
        }
    }

    let vmat = DMatrix::from_columns(&right_a);
    let sv = vmat.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > MAX_EIGVEC_COND {
        return Err(Error::Defective(format!(
            "eigenvector matrix condition number {cond:.3e}; restriction is not diagonalizable"
        )));
    }
    let vinv = vmat
        .try_inverse()
        .ok_or_else(|| Error::Defective("eigenvector matrix is singular".into()))?;

    let qc = factor.basis.map(C64::from);
    let bc = factor.coeffs.map(C64::from);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let lambda = lambdas[i];
        let v_state = &qc * &right_a[i];
        let b_row = vinv.row(i).into_owned();
        let w = (b_row * &bc).transpose() / lambda;

        let norm = w.norm();
        // first component within a relative 1e-9 of the largest modulus
        let wmax = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = w
            .iter()
            .position(|z| z.norm() >= wmax * (1.0 - 1e-9))
            .unwrap_or(0);
        let phase = w[pivot] / w[pivot].norm();
        let c = phase.conj() / norm;
        let right: Vec<C64> = w.iter().map(|z| z * c).collect();
        let left: Vec<C64> = v_state.iter().map(|z| (z / c).conj()).collect();
        out.push(EigenTriplet {
            eigenvalue: lambda,
            right,
            left,
        });
    }
    Ok(out)
}

/// Per-mode polar data; see [`decay_rates_frequencies`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpectrum {
    pub index: usize,
    pub eigenvalue: C64,
    pub abs: f64,
    pub arg: f64,
    /// `-ln|lambda| / dt` per unit time (infinite when `lambda = 0`).
    pub decay_rate: f64,
    /// `arg(lambda) / (2 pi dt)` cycles per unit time, `arg` in `(-pi, pi]`.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub dt: f64,
    pub modes: Vec<ModeSpectrum>,
}

pub fn decay_rates_frequencies(eigenvalues: &[C64], dt: f64) -> Result<SpectralSummary> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let modes = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let abs = z.norm();
            let mut arg = z.arg();
            if arg <= -PI {
                arg = PI;
            }
            let decay_rate = if abs == 0.0 { f64::INFINITY } else { -abs.ln() / dt };
            ModeSpectrum {
                index: i + 1,
                eigenvalue: z,
                abs,
                arg,
                decay_rate,
                frequency: arg / (2.0 * PI * dt),
            }
        })
        .collect();
    Ok(SpectralSummary { dt, modes })
}

pub fn spectral_summary(triplets: &[EigenTriplet], dt: f64) -> Result<SpectralSummary> {
    let ev: Vec<C64> = triplets.iter().map(|t| t.eigenvalue).collect();
    decay_rates_frequencies(&ev, dt)
}

/// Index of the mode with eigenvalue closest to 1 (first one on ties).
pub fn steady_mode_index(triplets: &[EigenTriplet]) -> Option<usize> {
    triplets
        .iter()
        .enumerate()
        .map(|(i, t)| (i, (t.eigenvalue - 1.0).norm()))
        .fold(None, |best: Option<(usize, f64)>, cur| match best {
            Some(b) if b.1 <= cur.1 => Some(b),
            _ => Some(cur),
        })
        .map(|(i, _)| i)
}

pub fn steady_mode(triplets: &[EigenTriplet]) -> Result<&EigenTriplet> {
    steady_mode_index(triplets)
        .map(|i| &triplets[i])
        .ok_or_else(|| Error::InvalidParameter("no modes to choose from".into()))
}

/// Koopman mode expansion of `f` started from `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub modes: Vec<ModeTerm>,
    /// `f^T (I - Pi) x0` where `Pi` projects onto the learned range along
    /// the kernel of `T`; the eigenvalue-zero part, present only at `t = 0`.
    pub kernel_term: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerm {
    pub eigenvalue: C64,
    /// `gamma_i^f = <xi_i, f>`.
    pub amplitude: C64,
    /// `psi_i(x0)`.
    pub initial: C64,
}

impl ModeDecomposition {
    /// `sum_i lambda_i^t gamma_i psi_i(x0)`, plus the kernel term at `t = 0`.
    pub fn reconstruct(&self, t: usize) -> C64 {
        let mut acc: C64 = self
            .modes
            .iter()
            .map(|m| m.eigenvalue.powu(t as u32) * m.amplitude * m.initial)
            .sum();
        if t == 0 {
            acc += self.kernel_term;
        }
        acc
    }

    /// Mode sum without the kernel term: the range projection of the dynamics.
    pub fn range_part(&self, t: usize) -> C64 {
        self.modes
            .iter()
            .map(|m| m.eigenvalue.powu(t as u32) * m.amplitude * m.initial)
            .sum()
    }

    pub fn series(&self, horizon: usize) -> Vec<C64> {
        (0..=horizon).map(|t| self.reconstruct(t)).collect()
    }
}

pub fn mode_decomposition(triplets: &[EigenTriplet], f: &[f64], x0: &[f64]) -> ModeDecomposition {
    let modes: Vec<ModeTerm> = triplets
        .iter()
        .map(|tr| ModeTerm {
            eigenvalue: tr.eigenvalue,
            amplitude: tr.amplitude(f),
            initial: tr.eval(x0),
        })
        .collect();
    // z = x0 - sum_i conj(xi_i) psi_i(x0)
    let mut z: Vec<C64> = x0.iter().map(|&v| C64::from(v)).collect();
    for (tr, m) in triplets.iter().zip(&modes) {
        for (zk, l) in z.iter_mut().zip(&tr.left) {
            *zk -= l.conj() * m.initial;
        }
    }
    let kernel_term = z.iter().zip(f).map(|(zk, fk)| zk.re * fk).sum();
    ModeDecomposition { modes, kernel_term }
}

/// Operator `Psi` with `tr(Psi rho) = psi(x(rho))` for every state.
pub fn eigenfunction_operator(triplet: &EigenTriplet, n: usize) -> Result<ComplexMatrix> {
    let c = PauliCoefficients::new(n, triplet.right.clone())?;
    Ok(from_pauli_coeffs(&c))
}

/// `||[Psi, S]||_F / (||Psi||_F ||S||_F)`.
pub fn symmetry_residual(psi: &ComplexMatrix, s: &ComplexMatrix) -> Result<f64> {
    let (np, ns) = (frobenius_norm(psi), frobenius_norm(s));
    if np == 0.0 || ns == 0.0 {
        return Err(Error::InvalidParameter(
            "symmetry residual needs nonzero operators".into(),
        ));
    }
    Ok(frobenius_norm(&commutator(psi, s)?) / (np * ns))
}

/// Largest relative deviation of `psi(x_t)` from `psi(x_0)` over a state sequence.
pub fn eigenfunction_drift(triplet: &EigenTriplet, states: &[Vec<f64>]) -> f64 {
    let Some(first) = states.first() else {
        return 0.0;
    };
    let v0 = triplet.eval(first);
    states
        .iter()
        .map(|x| (triplet.eval(x) - v0).norm() / v0.norm())
        .fold(0.0, f64::max)
}

/// `<f, x>` for real vectors.
pub fn observable_value(f: &[f64], x: &[f64]) -> f64 {
    dot(f, x)
}
