//! Reduced rank regression with Tikhonov regularization on a linear kernel.
//!
//! Minimizes `(1/n) sum ||y_i - T x_i||^2 + reg ||T||_F^2` over `rank(T) <= r`.
//! With `C_X = (1/n) X X^T + reg I`, `C_YX = (1/n) Y X^T` and
//! `W = C_X^{-1/2}`, the minimizer is `T = [C_YX W]_r W` where `[.]_r` is the
//! best rank-`r` approximation (substitute `S = T C_X^{1/2}` and apply
//! Eckart-Young).
//!
//! `C_X` is never formed: its eigendecomposition comes from the thin SVD of
//! the data matrix `X = U diag(s) V^T`, giving eigenvalues `s^2/n + reg` on
//! `span(U)` and `reg` on the complement. The complement drops out of
//! `C_YX W` exactly, so the whole fit runs on `d x n` factors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::par::Exec;

/// Relative gap below which two singular values at the rank cutoff count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Learned forward map `y ~ T x` on Pauli feature vectors. The Koopman
/// operator acts on observable coefficient vectors as `T^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct KoopmanEstimator {
    feature_dim: usize,
    rank: usize,
    reg: f64,
    dt: f64,
    /// Row-major `feature_dim x feature_dim`.
    transfer: Vec<f64>,
}

/// Diagnostics of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitInfo {
    /// Singular values of `C_YX W`, descending.
    pub singular_values: Vec<f64>,
    /// Rank actually used (`min(rank, available directions)`).
    pub effective_rank: usize,
    /// `sigma_r` and `sigma_{r+1}` were within [`TIE_TOL`] of each other.
    pub tie_at_cutoff: bool,
}

impl KoopmanEstimator {
    /// Wraps an explicit transfer matrix (row-major).
    pub fn from_transfer(
        feature_dim: usize,
        rank: usize,
        reg: f64,
        dt: f64,
        transfer: Vec<f64>,
    ) -> Result<Self> {
        if transfer.len() != feature_dim * feature_dim {
            return Err(Error::DimensionMismatch(format!(
                "transfer has {} entries, expected {}^2",
                transfer.len(),
                feature_dim
            )));
        }
        if rank == 0 || rank > feature_dim {
            return Err(Error::InvalidParameter(format!(
                "rank {rank} outside 1..={feature_dim}"
            )));
        }
        Ok(Self {
            feature_dim,
            rank,
            reg,
            dt,
            transfer,
        })
    }

    pub fn from_matrix(t: &DMatrix<f64>, rank: usize, reg: f64, dt: f64) -> Result<Self> {
        if t.nrows() != t.ncols() {
            return Err(Error::DimensionMismatch("transfer must be square".into()));
        }
        let d = t.nrows();
        let data = (0..d).flat_map(|i| (0..d).map(move |j| t[(i, j)])).collect();
        Self::from_transfer(d, rank, reg, dt, data)
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn reg(&self) -> f64 {
        self.reg
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn transfer(&self) -> &[f64] {
        &self.transfer
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.feature_dim, self.feature_dim, &self.transfer)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_with(x, Exec::default())
    }

    /// `T x`; each output row is summed in a fixed order, so every backend
    /// gives bit-identical results.
    pub fn apply_with(&self, x: &[f64], exec: Exec) -> Vec<f64> {
        assert_eq!(x.len(), self.feature_dim, "feature dimension mismatch");
        let d = self.feature_dim;
        let mut out = vec![0.0; d];
        exec.for_each_chunk_mut(&mut out, 64, |ci, chunk| {
            for (off, o) in chunk.iter_mut().enumerate() {
                let row = &self.transfer[(ci * 64 + off) * d..(ci * 64 + off + 1) * d];
                *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
            }
        });
        out
    }

    /// `T^t x0` by repeated application.
    pub fn forecast_state(&self, x0: &[f64], t: usize) -> Vec<f64> {
        let mut x = x0.to_vec();
        for _ in 0..t {
            x = self.apply(&x);
        }
        x
    }

    /// States `T^t x0` for `t = 0..=horizon`.
    pub fn forecast_series(&self, x0: &[f64], horizon: usize) -> Vec<Vec<f64>> {
        self.forecast_series_with(x0, horizon, Exec::default())
    }

    pub fn forecast_series_with(&self, x0: &[f64], horizon: usize, exec: Exec) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(x0.to_vec());
        for t in 0..horizon {
            let next = self.apply_with(&out[t], exec);
            out.push(next);
        }
        out
    }

    /// `<f, T^t x0>` for a real (hermitian) observable coefficient vector.
    pub fn forecast_observable(&self, f: &[f64], x0: &[f64], t: usize) -> f64 {
        dot(f, &self.forecast_state(x0, t))
    }

    /// Mean squared one-step residual `(1/n) sum ||y - T x||^2`.
    pub fn training_residual(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
        let n = xs.len() as f64;
        xs.iter()
            .zip(ys)
            .map(|(x, y)| {
                let p = self.apply(x);
                p.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            })
            .sum::<f64>()
            / n
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn columns(v: &[Vec<f64>]) -> DMatrix<f64> {
    let d = v[0].len();
    DMatrix::from_fn(d, v.len(), |i, j| v[j][i])
}

/// `(1/n) sum ||y_i - T x_i||^2 + reg ||T||_F^2`.
pub fn rrr_objective(t: &DMatrix<f64>, xs: &[Vec<f64>], ys: &[Vec<f64>], reg: f64) -> f64 {
    let x = columns(xs);
    let y = columns(ys);
    let resid = &y - t * &x;
    resid.norm_squared() / xs.len() as f64 + reg * t.norm_squared()
}

fn validate_inputs(xs: &[Vec<f64>], ys: &[Vec<f64>], rank: usize, reg: f64) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::InvalidParameter("need at least one training pair".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} inputs vs {} outputs",
            xs.len(),
            ys.len()
        )));
    }
    let d = xs[0].len();
    if d == 0 || xs.iter().chain(ys).any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch("feature vectors differ in length".into()));
    }
    if xs.iter().chain(ys).flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite feature value".into()));
    }
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} outside 1..={d} (feature dimension)"
        )));
    }
    if !(reg > 0.0 && reg.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "regularization must be > 0, got {reg}"
        )));
    }
    Ok(d)
}

/// Thin SVD with singular values sorted descending (stable on ties) and
/// each left singular vector's first significant component made positive.
pub(crate) fn sorted_svd(m: DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = m.svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::Numerical("SVD did not return U".into()))?;
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return V^T".into()))?;
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

    let k = order.len();
    let mut u_out = DMatrix::zeros(u.nrows(), k);
    let mut v_out = DMatrix::zeros(vt.ncols(), k);
    let mut s_out = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u.column(src).into_owned();
        let mut vcol = vt.row(src).transpose();
        let scale = ucol.amax();
        if let Some(first) = ucol.iter().find(|c| c.abs() > 1e-12 * scale) {
            if *first < 0.0 {
                ucol.neg_mut();
                vcol.neg_mut();
            }
        }
        u_out.set_column(dst, &ucol);
        v_out.set_column(dst, &vcol);
        s_out.push(s[src]);
    }
    Ok((u_out, s_out, v_out))
}

pub fn fit_rrr(xs: &[Vec<f64>], ys: &[Vec<f64>], rank: usize, reg: f64) -> Result<KoopmanEstimator> {
    fit_rrr_with_info(xs, ys, rank, reg).map(|(est, _)| est)
}

pub fn fit_rrr_with_info(
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    rank: usize,
    reg: f64,
) -> Result<(KoopmanEstimator, FitInfo)> {
    let d = validate_inputs(xs, ys, rank, reg)?;
    let n = xs.len() as f64;
    let x = columns(xs);
    let y = columns(ys);

    // Eigenbasis of C_X restricted to the data span.
    let (ux, sx, vx) = sorted_svd(x)?;
    let inv_sqrt_ev: Vec<f64> = sx.iter().map(|s| 1.0 / (s * s / n + reg).sqrt()).collect();

    // C_YX W = (1/n) Y V diag(s / sqrt(ev)) U^T =: M U^T
    let mut mcore = &y * &vx;
    for (j, (s, w)) in sx.iter().zip(&inv_sqrt_ev).enumerate() {
        mcore.column_mut(j).scale_mut(s * w / n);
    }
    let (p, sigma, q) = sorted_svd(mcore)?;

    let r = rank.min(sigma.len());
    let tie_at_cutoff = r < sigma.len() && sigma[r - 1] - sigma[r] <= TIE_TOL * sigma[0];

    // T = P_r diag(sigma_r) Q_r^T diag(ev^{-1/2}) U^T
    let mut left = p.columns(0, r).into_owned();
    for (j, s) in sigma.iter().take(r).enumerate() {
        left.column_mut(j).scale_mut(*s);
    }
    let mut right = q.columns(0, r).transpose();
    for (j, w) in inv_sqrt_ev.iter().enumerate() {
        right.column_mut(j).scale_mut(*w);
    }
    let right = right * ux.transpose();
    let t = left * right;
    debug_assert_eq!(t.nrows(), d);

    let est = KoopmanEstimator::from_matrix(&t, rank, reg, 1.0)?;
    Ok((
        est,
        FitInfo {
            singular_values: sigma,
            effective_rank: r,
            tie_at_cutoff,
        },
    ))
}

/// Ridge solution `C_YX C_X^{-1}`, the unconstrained limit of [`fit_rrr`].
pub fn fit_ridge(xs: &[Vec<f64>], ys: &[Vec<f64>], reg: f64) -> Result<DMatrix<f64>> {
    let d = validate_inputs(xs, ys, 1, reg)?;
    let n = xs.len() as f64;
    let x = columns(xs);
    let y = columns(ys);
    let cx = &x * x.transpose() / n + DMatrix::identity(d, d) * reg;
    let cyx = &y * x.transpose() / n;
    let chol = cx
        .cholesky()
        .ok_or_else(|| Error::Numerical("regularized covariance not positive definite".into()))?;
    // T C_X = C_YX  <=>  C_X T^T = C_XY
    Ok(chol.solve(&cyx.transpose()).transpose())
}

#[cfg(test)]
pub(crate) fn to_dvector(v: &[f64]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(v)
}
