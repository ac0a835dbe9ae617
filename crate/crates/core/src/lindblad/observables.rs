//! Physical observables of the spin chain (hbar = 1).

use super::params::SpinChainParams;
use crate::algebra::matrix::{ComplexMatrix, C64, I};
use crate::algebra::{embed, pauli_matrix, PauliAxis};
use crate::error::{Error, Result};

fn check_site(site: usize, n: usize) -> Result<()> {
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    Ok(())
}

/// `S_i^z = Z_i / 2`.
pub fn spin_polarization_op(site: usize, n: usize) -> Result<ComplexMatrix> {
    check_site(site, n)?;
    Ok(embed(&pauli_matrix(PauliAxis::Z), site, n)?.scale_real(0.5))
}

/// `S^z_tot = sum_i S_i^z`, diagonal.
pub fn total_sz_op(n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let diag: Vec<C64> = (0..dim)
        .map(|idx| {
            let down = idx.count_ones() as f64;
            C64::from(0.5 * (n as f64 - 2.0 * down))
        })
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Ladder operators with the unnormalized convention `X +- iY`.
fn ladder(raising: bool) -> ComplexMatrix {
    let x = pauli_matrix(PauliAxis::X);
    let y = pauli_matrix(PauliAxis::Y);
    let s = if raising { I } else { -I };
    let mut out = x;
    out.axpy(s, &y);
    out
}

/// `sigma_a^+ sigma_b^- - sigma_a^- sigma_b^+` on sites `a`, `b`.
fn hop(a: usize, b: usize, n: usize) -> Result<ComplexMatrix> {
    let (up, down) = (ladder(true), ladder(false));
    let fwd = embed(&up, a, n)?.matmul(&embed(&down, b, n)?)?;
    let bwd = embed(&down, a, n)?.matmul(&embed(&up, b, n)?)?;
    fwd.try_sub(&bwd)
}

/// Spin current at `site`:
/// `(i J_par / 4) [ (s+_i s-_{i+1} - s-_i s+_{i+1}) - (s+_{i-1} s-_i - s-_{i-1} s+_i) ]`.
///
/// At the chain ends the missing neighbour's bracket is dropped.
pub fn spin_current_op(site: usize, params: &SpinChainParams) -> Result<ComplexMatrix> {
    spin_current_op_raw(site, params.n, params.j_par)
}

pub fn spin_current_op_raw(site: usize, n: usize, j_par: f64) -> Result<ComplexMatrix> {
    check_site(site, n)?;
    let mut bracket = ComplexMatrix::zeros(1 << n);
    if site < n {
        bracket += &hop(site, site + 1, n)?;
    }
    if site > 1 {
        bracket.axpy(C64::from(-1.0), &hop(site - 1, site, n)?);
    }
    Ok(bracket.scale(I * (j_par / 4.0)))
}

/// `Re tr(A rho)`; errors if the imaginary residue exceeds 1e-10.
pub fn expectation(a: &ComplexMatrix, rho: &ComplexMatrix) -> Result<f64> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observable dim {} vs state dim {}",
            a.dim(),
            rho.dim()
        )));
    }
    let n = a.dim();
    let mut tr = C64::from(0.0);
    for i in 0..n {
        for k in 0..n {
            tr += a[(i, k)] * rho[(k, i)];
        }
    }
    if tr.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "expectation has imaginary residue {:.3e}; observable or state not hermitian",
            tr.im
        )));
    }
    Ok(tr.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::integrate::initial_state;

    #[test]
    fn single_site_polarization() {
        let s = spin_polarization_op(1, 1).unwrap();
        assert_eq!(s, ComplexMatrix::from_diagonal(&[C64::from(0.5), C64::from(-0.5)]));
        for site in 1..=4 {
            assert_eq!(spin_polarization_op(site, 4).unwrap().trace().norm(), 0.0);
        }
        assert!(spin_polarization_op(0, 3).is_err());
        assert!(spin_polarization_op(4, 3).is_err());
    }

    #[test]
    fn total_sz_matches_sum_and_spectrum() {
        let n = 5;
        let mut sum = ComplexMatrix::zeros(32);
        for s in 1..=n {
            sum += &spin_polarization_op(s, n).unwrap();
        }
        let tot = total_sz_op(n);
        assert!(tot.max_abs_diff(&sum) < 1e-15);
        let mut ev = tot.hermitian_eigenvalues();
        ev.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        assert_eq!(ev, vec![-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
    }

    #[test]
    fn currents_are_hermitian_and_traceless() {
        let p = SpinChainParams::default();
        for site in 1..=5 {
            let j = spin_current_op(site, &p).unwrap();
            assert!(j.hermiticity_error() <= 1e-12, "site {site}");
            assert!(j.trace().norm() < 1e-15);
            assert!(j.max_abs() > 0.0);
        }
        assert!(spin_current_op(6, &p).is_err());
    }

    #[test]
    fn current_vanishes_on_basis_product_state() {
        let p = SpinChainParams::default();
        let rho = initial_state("d,u,u,u,u").unwrap();
        for site in 1..=5 {
            let j = spin_current_op(site, &p).unwrap();
            assert_eq!(expectation(&j, &rho).unwrap(), 0.0);
        }
    }

    #[test]
    fn expectation_examples() {
        let rho = initial_state("d,u,u,u,u").unwrap();
        assert!((expectation(&ComplexMatrix::identity(32), &rho).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(expectation(&spin_polarization_op(1, 5).unwrap(), &rho).unwrap(), -0.5);
        assert_eq!(expectation(&total_sz_op(5), &rho).unwrap(), 1.5);
        assert!(expectation(&ComplexMatrix::identity(2), &rho).is_err());
    }

    #[test]
    fn ladder_convention() {
        let up = ladder(true);
        assert_eq!(up[(0, 1)], C64::from(2.0));
        assert_eq!(up[(1, 0)], C64::from(0.0));
        assert_eq!(ladder(false), up.dagger());
    }
}
