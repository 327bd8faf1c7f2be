//! Dense complex linear algebra for small multi-qubit systems.
//!
//! Bit convention: qubit 0 is the most significant bit of a basis index, so
//! `|abc>` has index `4a + 2b + c`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance used when validating Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Number of qubits for a square power-of-two operator.
    pub fn num_qubits(&self) -> Result<usize> {
        if !self.is_square() || !self.rows.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "{}x{} matrix is not a qubit operator",
                self.rows, self.cols
            )));
        }
        Ok(self.rows.trailing_zeros() as usize)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += s * other`, shapes must match.
    pub fn add_scaled(&mut self, other: &ComplexMatrix, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for r in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[r * self.cols + k] * other.data[k * other.cols + r];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut err: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                err = err.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                let base = (ar * b.rows + br) * cols + ac * b.cols;
                for bc in 0..b.cols {
                    out.data[base + bc] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a sequence, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, m| kron(&acc, m))
}

/// Pure state of `k` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "state vector length {} is not a power of two",
                amps.len()
            )));
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index>` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n < 1e-300 {
            return Err(Error::InvalidParameter("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            amps: self.amps.iter().map(|z| z / n).collect(),
        })
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |r, c| self.amps[r] * self.amps[c].conj())
    }

    /// Applies a `2^m x 2^m` operator to the listed wires; `wires[0]` is the
    /// most significant qubit of the operator.
    pub fn apply(&self, op: &ComplexMatrix, wires: &[usize]) -> Result<StateVector> {
        let n = self.num_qubits();
        let m = wires.len();
        if op.rows() != 1 << m || !op.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 1 << m,
                actual: op.rows(),
            });
        }
        check_distinct(wires, n)?;
        let masks: Vec<usize> = wires.iter().map(|&w| 1 << (n - 1 - w)).collect();
        let all: usize = masks.iter().sum();
        let local = |sub: usize| -> usize {
            masks
                .iter()
                .enumerate()
                .filter(|(j, _)| sub >> (m - 1 - j) & 1 == 1)
                .map(|(_, &mk)| mk)
                .sum()
        };
        let offsets: Vec<usize> = (0..1 << m).map(local).collect();
        let mut out = vec![ZERO; self.dim()];
        let mut buf = vec![ZERO; 1 << m];
        for base in 0..self.dim() {
            if base & all != 0 {
                continue;
            }
            for (j, b) in buf.iter_mut().enumerate() {
                *b = self.amps[base | offsets[j]];
            }
            for r in 0..1 << m {
                let mut acc = ZERO;
                for (c, b) in buf.iter().enumerate() {
                    acc += op[(r, c)] * b;
                }
                out[base | offsets[r]] = acc;
            }
        }
        Ok(StateVector { amps: out })
    }
}

fn check_distinct(wires: &[usize], num_qubits: usize) -> Result<()> {
    let mut seen = vec![false; num_qubits];
    for &w in wires {
        if w >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: w,
                num_qubits,
            });
        }
        if seen[w] {
            return Err(Error::InvalidParameter(format!("qubit {w} listed twice")));
        }
        seen[w] = true;
    }
    Ok(())
}

/// Wire relabeling: source qubit `i` moves to wire `dest[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitPermutation {
    dest: Vec<usize>,
}

impl QubitPermutation {
    pub fn new(dest: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; dest.len()];
        for &d in &dest {
            if d >= dest.len() || seen[d] {
                return Err(Error::InvalidParameter(format!(
                    "{dest:?} is not a permutation"
                )));
            }
            seen[d] = true;
        }
        Ok(Self { dest })
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            dest: (0..num_qubits).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.dest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dest.is_empty()
    }

    pub fn destinations(&self) -> &[usize] {
        &self.dest
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.dest.len()];
        for (i, &d) in self.dest.iter().enumerate() {
            inv[d] = i;
        }
        Self { dest: inv }
    }

    /// Image of a basis index under the relabeling.
    pub fn map_index(&self, index: usize) -> usize {
        let n = self.dest.len();
        let mut out = 0;
        for (q, &d) in self.dest.iter().enumerate() {
            if index >> (n - 1 - q) & 1 == 1 {
                out |= 1 << (n - 1 - d);
            }
        }
        out
    }

    fn index_table(&self) -> Vec<usize> {
        (0..1usize << self.dest.len()).map(|i| self.map_index(i)).collect()
    }
}

pub fn permute_matrix(rho: &ComplexMatrix, perm: &QubitPermutation) -> Result<ComplexMatrix> {
    let n = rho.num_qubits()?;
    if n != perm.len() {
        return Err(Error::DimensionMismatch {
            expected: perm.len(),
            actual: n,
        });
    }
    let table = perm.index_table();
    let dim = rho.rows();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        let rr = table[r];
        for c in 0..dim {
            out.data[rr * dim + table[c]] = rho.data[r * dim + c];
        }
    }
    Ok(out)
}

pub fn permute_state(psi: &StateVector, perm: &QubitPermutation) -> Result<StateVector> {
    if psi.num_qubits() != perm.len() {
        return Err(Error::DimensionMismatch {
            expected: perm.len(),
            actual: psi.num_qubits(),
        });
    }
    let mut amps = vec![ZERO; psi.dim()];
    for (i, &a) in psi.amps.iter().enumerate() {
        amps[perm.map_index(i)] = a;
    }
    Ok(StateVector { amps })
}

fn check_qubits(rho: &ComplexMatrix, num_qubits: usize) -> Result<()> {
    if !rho.is_square() || rho.rows() != 1 << num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << num_qubits,
            actual: rho.rows(),
        });
    }
    Ok(())
}

/// Traces out every qubit not in `keep`. Kept qubits stay in ascending order.
pub fn partial_trace(rho: &ComplexMatrix, num_qubits: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    check_qubits(rho, num_qubits)?;
    check_distinct(keep, num_qubits)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..num_qubits).filter(|q| !kept.contains(q)).collect();
    let spread = |bits: usize, wires: &[usize]| -> usize {
        let m = wires.len();
        wires
            .iter()
            .enumerate()
            .filter(|(j, _)| bits >> (m - 1 - j) & 1 == 1)
            .map(|(_, &w)| 1 << (num_qubits - 1 - w))
            .sum()
    };
    let keep_idx: Vec<usize> = (0..1 << kept.len()).map(|b| spread(b, &kept)).collect();
    let trace_idx: Vec<usize> = (0..1 << traced.len()).map(|b| spread(b, &traced)).collect();
    let dk = keep_idx.len();
    let dim = rho.rows();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (r, &kr) in keep_idx.iter().enumerate() {
        for (c, &kc) in keep_idx.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &trace_idx {
                acc += rho.data[(kr | t) * dim + (kc | t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the listed qubits' indices; an involution.
pub fn partial_transpose(rho: &ComplexMatrix, num_qubits: usize, transposed: &[usize]) -> Result<ComplexMatrix> {
    check_qubits(rho, num_qubits)?;
    check_distinct(transposed, num_qubits)?;
    let mask: usize = transposed.iter().map(|&q| 1 << (num_qubits - 1 - q)).sum();
    let dim = rho.rows();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let swap = (r ^ c) & mask;
            out.data[r * dim + c] = rho.data[(r ^ swap) * dim + (c ^ swap)];
        }
    }
    Ok(out)
}

/// Real spectrum of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    let eig = nalgebra::SymmetricEigen::new(m.to_nalgebra());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<Vec<(f64, StateVector)>> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    let eig = nalgebra::SymmetricEigen::new(m.to_nalgebra());
    let mut pairs: Vec<(f64, StateVector)> = (0..m.rows())
        .map(|k| {
            let amps: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
            (eig.eigenvalues[k], StateVector { amps })
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Pauli matrices.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(
        2,
        2,
        vec![ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO],
    )
    .unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[1.0, -1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_matrix(dim: usize, seed: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, dim, |r, c| {
            let k = (r * dim + c) % seed.len();
            Complex64::new(seed[k] * (1.0 + r as f64), seed[(k + 1) % seed.len()] - c as f64)
        })
    }

    fn random_density(dim: usize, seed: &[f64]) -> ComplexMatrix {
        let a = random_matrix(dim, seed);
        let p = &a * &a.dagger();
        let tr = p.trace().re;
        p.scale(1.0 / tr)
    }

    fn bell() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap()
    }

    fn ghz3() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![0.0; 8];
        v[0] = s;
        v[7] = s;
        StateVector::from_real(&v).unwrap().projector()
    }

    #[test]
    fn kron_identity_and_paulis() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
        let zz = kron(&pauli_z(), &pauli_z());
        let d: Vec<f64> = zz.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn kron_basis_projectors_big_endian() {
        let p0 = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        let p = kron(&p0, &p1);
        assert_eq!(p, StateVector::basis(2, 1).projector());
    }

    #[test]
    fn partial_trace_ghz_marginal() {
        let m = partial_trace(&ghz3(), 3, &[0]).unwrap();
        assert!(m.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn partial_trace_product_and_identity_cases() {
        let rho = random_density(4, &[0.3, -0.2, 0.7, 0.1, 0.5]);
        let sigma = random_matrix(2, &[0.4, 0.9, -0.3]);
        let joint = kron(&rho, &sigma);
        let kept = partial_trace(&joint, 3, &[0, 1]).unwrap();
        assert!(kept.max_abs_diff(&rho.scale_complex(sigma.trace())) < 1e-12);
        let all = partial_trace(&rho, 2, &[0, 1]).unwrap();
        assert!(all.max_abs_diff(&rho) < 1e-15);
        assert!(partial_trace(&rho, 2, &[2]).is_err());
    }

    #[test]
    fn partial_trace_composes() {
        let rho = random_density(16, &[0.11, 0.52, -0.33, 0.27, 0.9, -0.61, 0.05]);
        let step = partial_trace(&rho, 4, &[0, 1, 3]).unwrap();
        let step = partial_trace(&step, 3, &[0, 2]).unwrap();
        let direct = partial_trace(&rho, 4, &[0, 3]).unwrap();
        assert!(step.max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn partial_transpose_bell_is_npt() {
        let pt = partial_transpose(&bell().projector(), 2, &[1]).unwrap();
        let ev = hermitian_eigenvalues(&pt).unwrap();
        assert!((ev[0] + 0.5).abs() < 1e-12);
        let mixed = ComplexMatrix::identity(8).scale(0.125);
        assert_eq!(partial_transpose(&mixed, 3, &[0, 2]).unwrap(), mixed);
        assert!(partial_transpose(&mixed, 3, &[3]).is_err());
    }

    #[test]
    fn permutation_swap_basis_state() {
        let perm = QubitPermutation::new(vec![1, 0]).unwrap();
        let psi = StateVector::basis(2, 0b01);
        assert_eq!(permute_state(&psi, &perm).unwrap(), StateVector::basis(2, 0b10));
        let id = QubitPermutation::identity(2);
        assert_eq!(permute_state(&psi, &id).unwrap(), psi);
        assert!(QubitPermutation::new(vec![0, 0]).is_err());
        assert!(QubitPermutation::new(vec![0, 2]).is_err());
    }

    #[test]
    fn permutation_consistent_between_vector_and_matrix() {
        let mut amps = vec![0.0; 8];
        amps[0b011] = 0.6;
        amps[0b100] = 0.8;
        let psi = StateVector::from_real(&amps).unwrap();
        let perm = QubitPermutation::new(vec![2, 0, 1]).unwrap();
        let a = permute_matrix(&psi.projector(), &perm).unwrap();
        let b = permute_state(&psi, &perm).unwrap().projector();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        assert_eq!(hermitian_eigenvalues(&ComplexMatrix::identity(2)).unwrap(), vec![1.0, 1.0]);
        let ev = hermitian_eigenvalues(&pauli_x()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let ev = hermitian_eigenvalues(&pauli_y()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14);
        let bad = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn apply_matches_kron_operator() {
        let psi = StateVector::new(
            (0..8).map(|i| Complex64::new(0.1 * i as f64, 0.05 * (7 - i) as f64)).collect(),
        )
        .unwrap();
        let op = kron(&pauli_x(), &pauli_y());
        // op on wires (2, 0): wire 2 gets X, wire 0 gets Y
        let fast = psi.apply(&op, &[2, 0]).unwrap();
        let full = kron_all([&pauli_y(), &ComplexMatrix::identity(2), &pauli_x()]);
        let slow: Vec<Complex64> = (0..8)
            .map(|r| (0..8).map(|c| full[(r, c)] * psi.amplitudes()[c]).sum())
            .collect();
        for (a, b) in fast.amplitudes().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    fn arb_density(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
            let a = ComplexMatrix::from_fn(dim, dim, |r, c| {
                Complex64::new(v[2 * (r * dim + c)], v[2 * (r * dim + c) + 1])
            });
            let p = &a * &a.dagger();
            let tr = p.trace().re.max(1e-9);
            p.scale(1.0 / tr)
        })
    }

    proptest! {
        #[test]
        fn kron_is_associative(
            a in proptest::collection::vec(-1.0f64..1.0, 4),
            b in proptest::collection::vec(-1.0f64..1.0, 4),
            c in proptest::collection::vec(-1.0f64..1.0, 8),
        ) {
            let ma = ComplexMatrix::from_real(2, 2, &a).unwrap();
            let mb = ComplexMatrix::from_real(2, 2, &b).unwrap();
            let mc = ComplexMatrix::from_fn(2, 2, |r, k| Complex64::new(c[2 * r + k], c[4 + 2 * r + k]));
            let left = kron(&kron(&ma, &mb), &mc);
            let right = kron(&ma, &kron(&mb, &mc));
            prop_assert!(left.max_abs_diff(&right) < 1e-14);
        }

        #[test]
        fn permutation_preserves_spectrum_and_inverts(rho in arb_density(8), which in 0usize..6) {
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let perm = QubitPermutation::new(perms[which].to_vec()).unwrap();
            let p = permute_matrix(&rho, &perm).unwrap();
            let back = permute_matrix(&p, &perm.inverse()).unwrap();
            prop_assert!(back.max_abs_diff(&rho) < 1e-14);
            prop_assert!((p.trace() - rho.trace()).norm() < 1e-12);
            prop_assert!(p.is_hermitian(1e-12));
            let e1 = hermitian_eigenvalues(&rho).unwrap();
            let e2 = hermitian_eigenvalues(&p).unwrap();
            for (x, y) in e1.iter().zip(&e2) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn partial_transpose_is_involution(rho in arb_density(8), mask in 0usize..8) {
            let set: Vec<usize> = (0..3).filter(|q| mask >> q & 1 == 1).collect();
            let once = partial_transpose(&rho, 3, &set).unwrap();
            let twice = partial_transpose(&once, 3, &set).unwrap();
            prop_assert_eq!(twice, rho);
        }

        #[test]
        fn partial_trace_keeps_trace(rho in arb_density(8), mask in 0usize..8) {
            let keep: Vec<usize> = (0..3).filter(|q| mask >> q & 1 == 1).collect();
            let red = partial_trace(&rho, 3, &keep).unwrap();
            prop_assert!((red.trace() - rho.trace()).norm() < 1e-12);
        }

        #[test]
        fn density_spectrum_is_valid(rho in arb_density(4)) {
            let ev = hermitian_eigenvalues(&rho).unwrap();
            prop_assert!(ev[0] >= -1e-10);
            prop_assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}
