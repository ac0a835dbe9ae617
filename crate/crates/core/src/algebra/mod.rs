//! Dense complex matrices and the Pauli-string operator basis.

pub mod matrix;
pub mod pauli;

pub use matrix::{commutator, dagger, frobenius_norm, hs_inner, kron, ComplexMatrix, C64};
pub use pauli::{
    embed, from_pauli_coeffs, hermitian_features, pauli_matrix, to_pauli_coeffs,
    to_pauli_coeffs_with, PauliAxis, PauliCoefficients, PauliString, BASIS_ORDER,
};
