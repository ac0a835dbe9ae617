//! Pauli strings and the orthonormal Pauli-basis coordinates of operators.
//!
//! Basis order is lexicographic in `(I, X, Y, Z)` per site with site 1 the
//! most significant digit, i.e. string index `sum_s label_s * 4^(N - s)`.
//! Coefficients use the normalization `c_P = tr(P A) / sqrt(2^N)`, which makes
//! the basis orthonormal under the Hilbert-Schmidt inner product.

use std::fmt;
use std::str::FromStr;

use super::matrix::{kron, ComplexMatrix, C64, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::par::Exec;

/// Basis label string stored in trajectory files.
pub const BASIS_ORDER: &str = "IXYZ-lex-site1-major";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    fn digit(self) -> usize {
        self as usize
    }

    fn from_digit(d: usize) -> Self {
        Self::ALL[d]
    }

    fn flips(self) -> bool {
        matches!(self, PauliAxis::X | PauliAxis::Y)
    }

    /// Entry `<row_bit| sigma |row_bit ^ flips>`.
    #[inline]
    fn entry(self, row_bit: usize) -> C64 {
        match (self, row_bit) {
            (PauliAxis::I, _) | (PauliAxis::X, _) | (PauliAxis::Z, 0) => ONE,
            (PauliAxis::Z, _) => -ONE,
            (PauliAxis::Y, 0) => -I,
            (PauliAxis::Y, _) => I,
        }
    }

    fn symbol(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

impl FromStr for PauliAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "identity" | "id" => Ok(PauliAxis::I),
            "x" => Ok(PauliAxis::X),
            "y" => Ok(PauliAxis::Y),
            "z" => Ok(PauliAxis::Z),
            other => Err(Error::parse("pauli axis", format!("unknown axis '{other}'"))),
        }
    }
}

/// The standard 2x2 Pauli matrix (or the identity).
pub fn pauli_matrix(axis: PauliAxis) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    for row in 0..2 {
        let col = if axis.flips() { row ^ 1 } else { row };
        m[(row, col)] = axis.entry(row);
    }
    m
}

/// Places `op` (2x2) at `site` (1-based) of an `n`-spin register.
pub fn embed(op: &ComplexMatrix, site: usize, n: usize) -> Result<ComplexMatrix> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "embed expects a single-site operator, got dim {}",
            op.dim()
        )));
    }
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    let left = ComplexMatrix::identity(1 << (site - 1));
    let right = ComplexMatrix::identity(1 << (n - site));
    Ok(kron(&kron(&left, op), &right))
}

/// Tensor product of single-site Pauli labels, site 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    labels: Vec<PauliAxis>,
}

impl PauliString {
    pub fn new(labels: Vec<PauliAxis>) -> Self {
        Self { labels }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![PauliAxis::I; n])
    }

    /// The string at position `index` of the basis order for `n` spins.
    pub fn from_index(index: usize, n: usize) -> Self {
        let mut labels = vec![PauliAxis::I; n];
        let mut rest = index;
        for slot in labels.iter_mut().rev() {
            *slot = PauliAxis::from_digit(rest % 4);
            rest /= 4;
        }
        Self { labels }
    }

    pub fn index(&self) -> usize {
        self.labels.iter().fold(0, |acc, a| acc * 4 + a.digit())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[PauliAxis] {
        &self.labels
    }

    /// Bit mask of sites flipped by this string (site 1 = most significant bit).
    pub fn flip_mask(&self) -> usize {
        let n = self.n();
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, a)| a.flips())
            .fold(0, |m, (s, _)| m | 1 << (n - 1 - s))
    }

    /// Nonzero entry of row `row`: returns `(column, value)`.
    #[inline]
    pub fn row_entry(&self, row: usize) -> (usize, C64) {
        let n = self.n();
        let mut value = ONE;
        for (s, a) in self.labels.iter().enumerate() {
            let bit = (row >> (n - 1 - s)) & 1;
            value *= a.entry(bit);
        }
        (row ^ self.flip_mask(), value)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = 1 << self.n();
        let mut m = ComplexMatrix::zeros(dim);
        for row in 0..dim {
            let (col, v) = self.row_entry(row);
            m[(row, col)] = v;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.labels {
            write!(f, "{}", a.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| c.to_string().parse())
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(Error::parse("pauli string", "empty"));
        }
        Ok(Self::new(labels))
    }
}

/// Coordinates of an operator in the orthonormal Pauli-string basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficients {
    n: usize,
    coeffs: Vec<C64>,
}

impl PauliCoefficients {
    pub fn new(n: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 1 << (2 * n) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {n} spins (expected {})",
                coeffs.len(),
                1usize << (2 * n)
            )));
        }
        Ok(Self { n, coeffs })
    }

    pub fn from_real(n: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(n, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.re).collect()
    }

    /// Conjugate-linear dot product `sum conj(a_P) b_P`.
    pub fn dot(&self, other: &Self) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn identity_coefficient(&self) -> C64 {
        self.coeffs[0]
    }
}

fn spin_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn to_pauli_coeffs(a: &ComplexMatrix) -> Result<PauliCoefficients> {
    to_pauli_coeffs_with(a, Exec::default())
}

/// `c_P = tr(P A) / sqrt(2^N)` for every string `P`, in basis order.
pub fn to_pauli_coeffs_with(a: &ComplexMatrix, exec: Exec) -> Result<PauliCoefficients> {
    let dim = a.dim();
    let n = spin_count(dim)?;
    let norm = 1.0 / (dim as f64).sqrt();
    let coeffs = exec.map_range(1 << (2 * n), |idx| {
        let p = PauliString::from_index(idx, n);
        let mut tr = ZERO;
        for row in 0..dim {
            let (col, v) = p.row_entry(row);
            tr += v * a[(col, row)];
        }
        tr * norm
    });
    PauliCoefficients::new(n, coeffs)
}

/// Inverse of [`to_pauli_coeffs`]: `A = sum_P c_P P / sqrt(2^N)`.
pub fn from_pauli_coeffs(c: &PauliCoefficients) -> ComplexMatrix {
    let n = c.n();
    let dim = 1usize << n;
    let norm = 1.0 / (dim as f64).sqrt();
    let mut m = ComplexMatrix::zeros(dim);
    for (idx, &coef) in c.coeffs().iter().enumerate() {
        if coef == ZERO {
            continue;
        }
        let p = PauliString::from_index(idx, n);
        let scaled = coef * norm;
        for row in 0..dim {
            let (col, v) = p.row_entry(row);
            m[(row, col)] += scaled * v;
        }
    }
    m
}

/// Real coordinate vector of a hermitian matrix; fails if the imaginary
/// residue exceeds `tol`.
pub fn hermitian_features(a: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    let c = to_pauli_coeffs(a)?;
    if !c.is_real(tol) {
        return Err(Error::Numerical(format!(
            "operator is not hermitian: coefficient imaginary residue {:.3e}",
            c.max_imag()
        )));
    }
    Ok(c.real_parts())
}
