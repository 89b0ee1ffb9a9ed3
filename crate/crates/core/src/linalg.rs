//! Small dense complex linear algebra used throughout the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex square matrix in the energy eigenbasis.
pub type CMatrix = DMatrix<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// `(A + A†)/2`; exact for matrices that are already Hermitian.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Largest `|A_jk - conj(A_kj)|`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(a: &CMatrix) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Eigenvalues and eigenvectors of a Hermitian matrix (input is hermitized first).
pub fn hermitian_eigen(a: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    let eig = SymmetricEigen::try_new(hermitize(a), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<DVector<f64>> {
    hermitian_eigen(a).map(|(values, _)| values)
}

/// `V diag(f(λ)) V†`.
pub fn reconstruct(values: &DVector<f64>, vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let w = f(values[j]);
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite Hermitian matrix. Eigenvalues below
/// `clip` (including small negative round-off) are treated as zero.
pub fn psd_sqrt(a: &CMatrix, clip: f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(a)?;
    Ok(reconstruct(&values, &vectors, |x| if x < clip { 0.0 } else { x.sqrt() }))
}

/// Sum of singular values (trace norm).
pub fn nuclear_norm(a: &CMatrix) -> Result<f64> {
    let svd = a
        .clone()
        .try_svd_unordered(false, false, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    Ok(svd.singular_values.iter().sum())
}

/// Unitary polar factor `W` maximizing `Re tr(a W)`, with the nuclear norm of `a`.
///
/// For `a = U Σ V†` this is `W = V U†` and `Re tr(a W) = Σσ`.
pub fn polar_maximizer(a: &CMatrix) -> Result<(CMatrix, f64)> {
    let svd = a
        .clone()
        .try_svd_unordered(true, true, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    let (u, v_t) = (svd.u.ok_or(Error::EigenFailure)?, svd.v_t.ok_or(Error::EigenFailure)?);
    Ok((v_t.adjoint() * u.adjoint(), svd.singular_values.iter().sum()))
}

/// Frobenius norm `sqrt(Σ|A_jk|²)`.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Row-major `[re, im]` pairs, the JSON encoding of complex matrices.
pub fn to_pairs(a: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect()).collect()
}

pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::NotSquare { rows: n, cols: bad.len() });
    }
    Ok(CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}
