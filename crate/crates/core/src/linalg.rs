//! Dense Hermitian helpers on top of nalgebra's symmetric eigensolver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Eigenvalues of a real symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Largest `|m_ij − conj(m_ji)|` relative to the largest entry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Replaces `m` by `(m + m*)/2`.
pub fn symmetrize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Relative eigenvalue floor below which a Gram matrix is rejected.
pub const GRAM_FLOOR: f64 = 1e-12;

/// Principal inverse square root of a Hermitian positive definite matrix,
/// via eigendecomposition.
pub fn inverse_sqrt(gram: &CMatrix) -> Result<CMatrix> {
    let n = gram.nrows();
    if n != gram.ncols() {
        return Err(invalid("Gram matrix must be square"));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let floor = GRAM_FLOOR * max.abs();
    if !(min > floor) {
        return Err(Error::NearSingularGram { min, floor });
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = 1.0 / lam.sqrt();
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    let mut out = scaled * v.adjoint();
    symmetrize(&mut out);
    Ok(out)
}

/// Relative Frobenius distance of `ρ γ ρ` from the identity.
pub fn whitening_residual(gram: &CMatrix, whiten: &CMatrix) -> f64 {
    let n = gram.nrows();
    let prod = whiten * gram * whiten;
    let id = CMatrix::identity(n, n);
    (prod - &id).norm() / (n as f64).sqrt().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn real(rows: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, rows, data.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    #[test]
    fn inverse_sqrt_of_identity_and_diagonal() {
        let id = CMatrix::identity(4, 4);
        assert!((inverse_sqrt(&id).unwrap() - &id).norm() < 1e-15);
        let d = real(2, &[4.0, 0.0, 0.0, 1.0]);
        let r = inverse_sqrt(&d).unwrap();
        assert!((r - real(2, &[0.5, 0.0, 0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn inverse_sqrt_two_by_two() {
        // eigenvalues 3 on (1,1)/√2 and 1 on (1,−1)/√2
        let g = real(2, &[2.0, 1.0, 1.0, 2.0]);
        let r = inverse_sqrt(&g).unwrap();
        let a = 3f64.powf(-0.5);
        let expected = real(
            2,
            &[
                (a + 1.0) / 2.0,
                (a - 1.0) / 2.0,
                (a - 1.0) / 2.0,
                (a + 1.0) / 2.0,
            ],
        );
        assert!((&r - expected).norm() < 1e-14);
        assert!(whitening_residual(&g, &r) < 1e-14);
    }

    #[test]
    fn inverse_sqrt_rejects_singular() {
        let g = real(2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            inverse_sqrt(&g),
            Err(Error::NearSingularGram { .. })
        ));
    }

    #[test]
    fn complex_hermitian_eigenvalues() {
        // [[2, i], [−i, 2]] has eigenvalues 3 and 1
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let e = hermitian_eigenvalues(&m);
        assert_relative_eq!(e[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(e[1], 1.0, epsilon = 1e-14);
        assert_eq!(hermitian_defect(&m), 0.0);
    }
}
