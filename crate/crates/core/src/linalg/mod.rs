//! Small dense complex linear algebra: matrices, Hermitian operators, bipartite
//! pure states, partial traces and a Jacobi eigensolver.

mod eig;
mod hermitian;
mod matrix;

pub use eig::{jacobi_symmetric, EigenDecomposition};
pub use hermitian::{HermitianOp, Keep, PureState};
pub use matrix::ComplexMatrix;

use crate::error::Result;

/// Eigenvalues (descending) and orthonormal eigenvectors of `h`.
pub fn eig_hermitian(h: &HermitianOp) -> Result<EigenDecomposition> {
    h.eig()
}

pub fn kron(a: &HermitianOp, b: &HermitianOp) -> HermitianOp {
    a.kron(b)
}

pub fn partial_trace(h: &HermitianOp, dims: (usize, usize), keep: Keep) -> Result<HermitianOp> {
    h.partial_trace(dims, keep)
}

pub fn psd_distance(h: &HermitianOp) -> Result<f64> {
    h.psd_distance()
}

/// Orthonormal basis of the real space of `d x d` Hermitian matrices under
/// `⟨A, B⟩ = tr(AB)`: diagonal units, then symmetric and antisymmetric
/// off-diagonal pairs scaled by `1/√2`.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOp> {
    use num_complex::Complex64;
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut diag = vec![0.0; d];
        diag[i] = 1.0;
        basis.push(HermitianOp::diagonal(&diag));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let sym = ComplexMatrix::from_fn(d, d, |r, c| {
                if (r, c) == (i, j) || (r, c) == (j, i) {
                    Complex64::new(s, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let anti = ComplexMatrix::from_fn(d, d, |r, c| {
                if (r, c) == (i, j) {
                    Complex64::new(0.0, -s)
                } else if (r, c) == (j, i) {
                    Complex64::new(0.0, s)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            basis.push(HermitianOp::new(sym).expect("hermitian"));
            basis.push(HermitianOp::new(anti).expect("hermitian"));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal() {
        for d in 1..=3 {
            let b = hermitian_basis(d);
            assert_eq!(b.len(), d * d);
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((x.inner(y) - want).abs() < 1e-14);
                }
            }
        }
    }
}
