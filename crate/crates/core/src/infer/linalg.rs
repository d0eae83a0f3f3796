use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue tolerance for square roots and singularity checks.
pub(crate) const EIG_TOL: f64 = 1e-12;

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric square root by eigendecomposition, clipping eigenvalues below
/// zero. The flag reports eigenvalues more negative than the tolerance.
pub(crate) fn sym_sqrt(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let scale = eig.eigenvalues.amax();
    let clipped_negative = eig.eigenvalues.iter().any(|&l| l < -EIG_TOL * scale);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    (v * DMatrix::from_diagonal(&roots) * v.transpose(), clipped_negative)
}

/// Inverse of a symmetric positive definite matrix; `None` when the
/// smallest eigenvalue is not above the relative tolerance.
pub(crate) fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let s = symmetrize(m);
    let eig = SymmetricEigen::new(s.clone());
    let max = eig.eigenvalues.amax();
    if !(eig.eigenvalues.min() > EIG_TOL * max) {
        return None;
    }
    s.cholesky().map(|c| symmetrize(&c.inverse()))
}

/// Inverse of a covariance matrix for use as a weight. When it is singular
/// or nearly so, `1e-8 trace / dim` is added to the diagonal first; the flag
/// reports whether that happened.
pub fn regularized_inverse(sigma: &DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    if sigma.nrows() != sigma.ncols() || sigma.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "covariance matrix is {}x{}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if let Some(inv) = spd_inverse(sigma) {
        return Ok((inv, false));
    }
    let dim = sigma.nrows();
    let ridge = 1e-8 * sigma.trace() / dim as f64;
    if !(ridge > 0.0) {
        return Err(Error::Singular("covariance matrix has zero trace".into()));
    }
    let r = symmetrize(sigma) + DMatrix::identity(dim, dim) * ridge;
    r.cholesky()
        .map(|c| (symmetrize(&c.inverse()), true))
        .ok_or_else(|| Error::Singular("covariance matrix not positive semidefinite".into()))
}
