//! Dephasing Heisenberg chain and the Lindblad generator.

use super::params::SpinChainParams;
use crate::algebra::matrix::{matmul_into, ComplexMatrix, C64, I, ZERO};
use crate::algebra::{commutator, embed, pauli_matrix, PauliAxis};
use crate::error::{Error, Result};

/// `H = -1/2 sum_i [ J_par (X_i X_{i+1} + Y_i Y_{i+1}) + J_perp Z_i Z_{i+1} ]`
/// with open boundaries.
pub fn build_hamiltonian(params: &SpinChainParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = params.n;
    let mut h = ComplexMatrix::zeros(params.dim());
    let site_ops = |axis| -> Result<Vec<ComplexMatrix>> {
        (1..=n).map(|s| embed(&pauli_matrix(axis), s, n)).collect()
    };
    let (x, y, z) = (
        site_ops(PauliAxis::X)?,
        site_ops(PauliAxis::Y)?,
        site_ops(PauliAxis::Z)?,
    );
    for i in 0..n.saturating_sub(1) {
        let xx = &x[i] * &x[i + 1];
        let yy = &y[i] * &y[i + 1];
        let zz = &z[i] * &z[i + 1];
        h.axpy(C64::from(-0.5 * params.j_par), &xx);
        h.axpy(C64::from(-0.5 * params.j_par), &yy);
        h.axpy(C64::from(-0.5 * params.j_perp), &zz);
    }
    Ok(h)
}

/// `L_i = sqrt(gamma / 2) Z_i` for every site.
pub fn dephasing_ops(n: usize, gamma: f64) -> Result<Vec<ComplexMatrix>> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    let amp = (gamma / 2.0).sqrt();
    let z = pauli_matrix(PauliAxis::Z).scale_real(amp);
    (1..=n).map(|s| embed(&z, s, n)).collect()
}

pub fn build_dephasing_ops(params: &SpinChainParams) -> Result<Vec<ComplexMatrix>> {
    dephasing_ops(params.n, params.gamma)
}

/// Hamiltonian plus collapse operators.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: ComplexMatrix,
    collapse_ops: Vec<ComplexMatrix>,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, collapse_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let herr = hamiltonian.hermiticity_error();
        if herr > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "hamiltonian is not hermitian (max |H - H^dag| = {herr:.3e})"
            )));
        }
        if let Some(l) = collapse_ops.iter().find(|l| l.dim() != hamiltonian.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "collapse operator dim {} vs hamiltonian dim {}",
                l.dim(),
                hamiltonian.dim()
            )));
        }
        Ok(Self {
            hamiltonian,
            collapse_ops,
        })
    }

    /// The dephasing Heisenberg chain described by `params`.
    pub fn spin_chain(params: &SpinChainParams) -> Result<Self> {
        Self::new(build_hamiltonian(params)?, build_dephasing_ops(params)?)
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[ComplexMatrix] {
        &self.collapse_ops
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// `-i[H, rho] + sum_k ( L rho L^dag - (rho L^dag L + L^dag L rho) / 2 )`.
pub fn lindblad_rhs(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rho dim {} vs model dim {}",
            rho.dim(),
            model.dim()
        )));
    }
    let mut out = commutator(model.hamiltonian(), rho)?.scale(-I);
    for l in model.collapse_ops() {
        let ld = l.dagger();
        let ldl = ld.matmul(l)?;
        out += &l.matmul(rho)?.matmul(&ld)?;
        out.axpy(C64::from(-0.5), &rho.matmul(&ldl)?);
        out.axpy(C64::from(-0.5), &ldl.matmul(rho)?);
    }
    Ok(out)
}

/// Precompiled generator for hermitian states.
///
/// Uses `H_eff = H - (i/2) sum L^dag L` so that
/// `rhs = A + A^dag + sum_k L (L rho)^dag` with `A = -i H_eff rho`; every
/// product has a sparse left factor and the coherent part is exactly
/// hermitian.
#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    minus_i_heff: Vec<C64>,
    collapse: Vec<Vec<C64>>,
}

impl Generator {
    pub fn new(model: &LindbladModel) -> Result<Self> {
        let dim = model.dim();
        let mut heff = model.hamiltonian().clone();
        for l in model.collapse_ops() {
            let ldl = l.dagger().matmul(l)?;
            heff.axpy(C64::new(0.0, -0.5), &ldl);
        }
        let minus_i_heff = heff.scale(-I).as_slice().to_vec();
        let collapse = model
            .collapse_ops()
            .iter()
            .filter(|l| l.max_abs() > 0.0)
            .map(|l| l.as_slice().to_vec())
            .collect();
        Ok(Self {
            dim,
            minus_i_heff,
            collapse,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes the generator applied to hermitian `rho` into `out`.
    /// `scratch` must have `dim * dim` entries.
    pub fn apply(&self, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let n = self.dim;
        matmul_into(n, &self.minus_i_heff, rho, scratch);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = scratch[i * n + j] + scratch[j * n + i].conj();
            }
        }
        for l in &self.collapse {
            // scratch <- L rho, then out += L scratch^dag
            matmul_into(n, l, rho, scratch);
            for i in 0..n {
                for k in 0..n {
                    let lik = l[i * n + k];
                    if lik == ZERO {
                        continue;
                    }
                    for j in 0..n {
                        out[i * n + j] += lik * scratch[j * n + k].conj();
                    }
                }
            }
        }
    }

    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        let mut scratch = vec![ZERO; self.dim * self.dim];
        self.apply(rho.as_slice(), out.as_mut_slice(), &mut scratch);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrix::ONE;
    use crate::lindblad::observables::total_sz_op;

    fn params(n: usize, j_par: f64, j_perp: f64, gamma: f64) -> SpinChainParams {
        SpinChainParams {
            n,
            j_par,
            j_perp,
            gamma,
            ..SpinChainParams::default()
        }
    }

    fn random_density(dim: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = ComplexMatrix::from_fn(dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let p = &a * &a.dagger();
        let tr = p.trace().re;
        p.scale_real(1.0 / tr)
    }

    #[test]
    fn single_zz_bond() {
        let h = build_hamiltonian(&params(2, 0.0, 2.0, 0.0)).unwrap();
        let expect = ComplexMatrix::from_diagonal(&[-ONE, ONE, ONE, -ONE]);
        assert!(h.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn hamiltonian_commutes_with_total_sz() {
        for (jp, jz) in [(0.3, -1.1), (0.1 * std::f64::consts::PI, 0.2 * std::f64::consts::PI)] {
            for n in 2..=5 {
                let h = build_hamiltonian(&params(n, jp, jz, 0.01)).unwrap();
                let c = commutator(&h, &total_sz_op(n)).unwrap();
                assert!(c.max_abs() < 1e-13, "n = {n}");
                assert!(h.is_hermitian(1e-15));
            }
        }
    }

    #[test]
    fn paper_hamiltonian_is_traceless() {
        let h = build_hamiltonian(&SpinChainParams::default()).unwrap();
        assert!(h.trace().norm() < 1e-13);
        assert_eq!(h.dim(), 32);
    }

    #[test]
    fn dephasing_operator_scale() {
        let ops = dephasing_ops(1, 0.01).unwrap();
        assert_eq!(ops.len(), 1);
        assert!((ops[0][(0, 0)].re - 0.070_710_678_118_654_75).abs() < 1e-15);
        assert!((ops[0][(1, 1)].re + 0.070_710_678_118_654_75).abs() < 1e-15);
        for l in dephasing_ops(3, 0.0).unwrap() {
            assert_eq!(l.max_abs(), 0.0);
        }
        for l in dephasing_ops(3, 0.4).unwrap() {
            let ldl = l.dagger().matmul(&l).unwrap();
            assert!(ldl.max_abs_diff(&ComplexMatrix::identity(8).scale_real(0.2)) < 1e-15);
        }
        assert!(dephasing_ops(2, -1.0).is_err());
    }

    #[test]
    fn rhs_traceless_and_hermitian() {
        let model = LindbladModel::spin_chain(&params(3, 0.4, -0.7, 0.3)).unwrap();
        for seed in 0..5 {
            let rho = random_density(8, seed);
            let d = lindblad_rhs(&model, &rho).unwrap();
            assert!(d.trace().norm() < 1e-13);
            assert!(d.is_hermitian(1e-13));
        }
    }

    #[test]
    fn maximally_mixed_is_fixed_under_dephasing() {
        let model = LindbladModel::new(ComplexMatrix::zeros(8), dephasing_ops(3, 0.5).unwrap())
            .unwrap();
        let rho = ComplexMatrix::identity(8).scale_real(1.0 / 8.0);
        assert!(lindblad_rhs(&model, &rho).unwrap().max_abs() < 1e-16);
    }

    #[test]
    fn single_qubit_coherence_decays_at_gamma() {
        let gamma = 0.01;
        let model =
            LindbladModel::new(ComplexMatrix::zeros(2), dephasing_ops(1, gamma).unwrap()).unwrap();
        let rho = ComplexMatrix::from_fn(2, |_, _| C64::from(0.5));
        let d = lindblad_rhs(&model, &rho).unwrap();
        assert!((d[(0, 1)] - rho[(0, 1)] * -gamma).norm() < 1e-16);
        assert!(d[(0, 0)].norm() < 1e-16);
    }

    #[test]
    fn fast_generator_matches_reference() {
        let model = LindbladModel::spin_chain(&params(4, 0.31, 0.62, 0.05)).unwrap();
        let gen = Generator::new(&model).unwrap();
        for seed in 0..4 {
            let rho = random_density(16, 100 + seed);
            let slow = lindblad_rhs(&model, &rho).unwrap();
            let fast = gen.apply_matrix(&rho);
            assert!(slow.max_abs_diff(&fast) < 1e-14);
        }
    }

    #[test]
    fn model_validation() {
        let nonherm = ComplexMatrix::from_fn(2, |i, j| if i < j { ONE } else { ZERO });
        assert!(LindbladModel::new(nonherm, vec![]).is_err());
        assert!(LindbladModel::new(ComplexMatrix::zeros(2), vec![ComplexMatrix::zeros(4)]).is_err());
        let model = LindbladModel::new(ComplexMatrix::zeros(2), vec![]).unwrap();
        assert!(lindblad_rhs(&model, &ComplexMatrix::zeros(4)).is_err());
    }
}
