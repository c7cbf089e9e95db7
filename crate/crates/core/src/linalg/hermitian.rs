use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::eig::{hermitian_eigen, hermitian_eigenvalues, EigenDecomposition};
use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use crate::tolerance::TOL;

/// Which factor of a bipartite operator survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Keep {
    A,
    B,
}

/// A square complex matrix equal to its own adjoint.
///
/// Construction accepts matrices within `1e-10` of Hermitian and then
/// symmetrizes exactly, so every stored value is Hermitian to the last bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    matrix: ComplexMatrix,
}

impl HermitianOp {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let deviation = matrix.hermiticity_defect();
        let scale = 1.0f64.max(matrix.max_abs());
        if deviation > TOL.construction * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrize(&matrix))
    }

    /// `(M + M†)/2`, no tolerance check.
    pub(crate) fn symmetrize(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(m.get(i, i).re, 0.0)
            } else {
                0.5 * (m.get(i, j) + m.get(j, i).conj())
            }
        });
        Self { matrix }
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(dim, dim, entries)?)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            matrix: ComplexMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO }),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    /// Pauli matrix `σ_k` for `k = 1, 2, 3`.
    pub fn pauli(k: usize) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let data = match k {
            1 => vec![ZERO, ONE, ONE, ZERO],
            2 => vec![ZERO, -i, i, ZERO],
            3 => vec![ONE, ZERO, ZERO, -ONE],
            _ => panic!("Pauli index must be 1, 2 or 3"),
        };
        Self { matrix: ComplexMatrix::new(2, 2, data).expect("2x2") }
    }

    /// `(𝟙 + r·σ)/2` style Bloch operator `c𝟙 + r·σ`.
    pub fn bloch(c: f64, r: [f64; 3]) -> Self {
        let mut h = Self::identity(2).scale(c);
        for (k, &rk) in r.iter().enumerate() {
            h = h.add(&Self::pauli(k + 1).scale(rk));
        }
        h
    }

    /// Projector `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::symmetrize(&ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix + &other.matrix }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix - &other.matrix }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale_real(s) }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        Ok(Self { matrix: self.matrix.checked_add(&other.matrix)? })
    }

    /// `Σ_k c_k H_k` over a non-empty list.
    pub fn linear_combination<'a>(terms: impl IntoIterator<Item = (f64, &'a HermitianOp)>) -> Option<Self> {
        let mut acc: Option<HermitianOp> = None;
        for (c, h) in terms {
            let t = h.scale(c);
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t),
            });
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { matrix: self.matrix.conj() }
    }

    /// `U H U†` for a square `U` of matching size.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.checked_mul(&self.matrix)?.checked_mul(&u.adjoint())?;
        Ok(Self::symmetrize(&m))
    }

    /// `A H A` for Hermitian `A` (e.g. the diagonal `D` sandwich).
    pub fn sandwich(&self, a: &HermitianOp) -> Result<Self> {
        let m = a.matrix.checked_mul(&self.matrix)?.checked_mul(&a.matrix)?;
        Ok(Self::symmetrize(&m))
    }

    /// `tr(self · other)`, which is real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.get(i, j) * other.get(j, i)).re;
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kron(&other.matrix) }
    }

    /// Partial trace over the discarded factor of a `d_A ⊗ d_B` operator.
    pub fn partial_trace(&self, dims: (usize, usize), keep: Keep) -> Result<Self> {
        let (da, db) = dims;
        if da == 0 || db == 0 || da * db != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "partial trace dims {da}x{db} do not factor an operator of dimension {}",
                self.dim()
            )));
        }
        let m = &self.matrix;
        let out = match keep {
            Keep::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m.get(i * db + k, j * db + k)).sum()),
            Keep::B => ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m.get(k * db + i, k * db + j)).sum()),
        };
        Ok(Self::symmetrize(&out))
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        hermitian_eigen(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("non-empty"))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// `max(0, -λ_min)`: zero exactly when the operator is PSD.
    pub fn psd_distance(&self) -> Result<f64> {
        Ok((-self.min_eigenvalue()?).max(0.0))
    }

    /// Spectral projection onto the PSD cone (negative eigenvalues clipped).
    pub fn psd_part(&self) -> Result<Self> {
        self.spectral_map(|x| x.max(0.0))
    }

    /// `f(H)` via the eigendecomposition.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let e = self.eig()?;
        let n = self.dim();
        let v = &e.vectors;
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v.get(i, k) * v.get(j, k).conj() * f(e.values[k])).sum()
        });
        Ok(Self::symmetrize(&m))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j).norm() <= tol))
    }
}

impl Serialize for HermitianOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        HermitianOp::new(m).map_err(D::Error::custom)
    }
}

/// Unit vector in `C^{d_A} ⊗ C^{d_B}`, amplitudes indexed `i * d_B + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {dim_a}x{dim_b} system",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL.construction {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { dim_a, dim_b, amplitudes })
    }

    /// Rescales to unit norm before validating.
    pub fn normalized(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(dim_a, dim_b, amplitudes.into_iter().map(|z| z / norm).collect())
    }

    /// `Σ_i |ii⟩ / √d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut amp = vec![ZERO; d * d];
        let c = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            amp[i * d + i] = c;
        }
        Self { dim_a: d, dim_b: d, amplitudes: amp }
    }

    /// `Σ_i c_i |ii⟩` for real coefficients (normalized).
    pub fn schmidt_diagonal(coefficients: &[f64]) -> Result<Self> {
        let d = coefficients.len();
        let mut amp = vec![ZERO; d * d];
        for (i, &c) in coefficients.iter().enumerate() {
            amp[i * d + i] = Complex64::new(c, 0.0);
        }
        Self::normalized(d, d, amp)
    }

    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        let amp = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        Self::normalized(a.len(), b.len(), amp)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Coefficient matrix `C` with `|ψ⟩ = Σ C_ij |i⟩|j⟩`.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.dim_a, self.dim_b, self.amplitudes.clone()).expect("validated shape")
    }

    pub fn density(&self) -> HermitianOp {
        HermitianOp::outer(&self.amplitudes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(HermitianOp::new(m), Err(Error::NotHermitian { .. })));
        let almost = ComplexMatrix::from_real(2, 2, &[1.0, 0.5, 0.5 + 1e-12, 1.0]).unwrap();
        let h = HermitianOp::new(almost).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
    }

    #[test]
    fn pauli_spectra() {
        let z = HermitianOp::pauli(3);
        assert_eq!(z.eigenvalues().unwrap(), vec![1.0, -1.0]);
        let id = HermitianOp::identity(2);
        assert_eq!(id.eigenvalues().unwrap(), vec![1.0, 1.0]);
        let h = HermitianOp::identity(2).add(&HermitianOp::pauli(1).scale(0.5)).scale(0.5);
        let ev = h.eigenvalues().unwrap();
        assert!((ev[0] - 0.75).abs() < 1e-12 && (ev[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn psd_distance_examples() {
        assert_eq!(HermitianOp::identity(2).scale(0.5).psd_distance().unwrap(), 0.0);
        assert!((HermitianOp::pauli(3).psd_distance().unwrap() - 1.0).abs() < 1e-12);
        let h = HermitianOp::identity(2).sub(&HermitianOp::pauli(1).scale(1.2)).scale(0.5);
        assert!((h.psd_distance().unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn partial_traces() {
        let phi = PureState::maximally_entangled(2).density();
        let rho_a = phi.partial_trace((2, 2), Keep::B).unwrap();
        assert!(rho_a.max_abs_diff(&HermitianOp::identity(2).scale(0.5)) < 1e-14);
        let k = HermitianOp::pauli(3).kron(&HermitianOp::identity(2));
        let ev = k.eigenvalues().unwrap();
        for (got, want) in ev.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(phi.partial_trace((3, 2), Keep::A).is_err());
    }

    #[test]
    fn transpose_from_max_entangled() {
        // tr_A[(M ⊗ 𝟙)|Φ⁺⟩⟨Φ⁺|] = Mᵀ/2
        let m = HermitianOp::bloch(0.5, [0.1, 0.3, -0.2]);
        let rho = PureState::maximally_entangled(2).density();
        let prod = m.kron(&HermitianOp::identity(2)).matrix().checked_mul(rho.matrix()).unwrap();
        let b = ComplexMatrix::from_fn(2, 2, |i, j| (0..2).map(|k| prod.get(k * 2 + i, k * 2 + j)).sum());
        assert!(b.max_abs_diff(m.transpose().scale(0.5).matrix()) < 1e-14);
    }

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(2, 2, vec![ONE; 4]).is_err());
        assert!(PureState::normalized(2, 2, vec![ONE; 4]).is_ok());
        assert!(PureState::new(2, 2, vec![ONE; 3]).is_err());
    }
}
