use nalgebra::DMatrix;

use super::linalg::{spd_inverse, symmetrize};
use crate::error::{Error, Result};

fn check_shapes(jacobian: &DMatrix<f64>, weight: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<()> {
    let l = jacobian.nrows();
    if weight.shape() != (l, l) || sigma.shape() != (l, l) {
        return Err(Error::Dimension(format!(
            "Jacobian has {l} rows; weight is {:?}, covariance {:?}",
            weight.shape(),
            sigma.shape()
        )));
    }
    Ok(())
}

/// `(G'WG)^{-1}`, the bread of the sandwich.
pub(crate) fn bread(jacobian: &DMatrix<f64>, weight: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gwg = jacobian.transpose() * weight * jacobian;
    spd_inverse(&gwg).ok_or_else(|| {
        Error::Singular(
            "Jacobian' W Jacobian is singular: the moments do not identify every free parameter \
             (add moments or fix/tie parameters)"
                .into(),
        )
    })
}

/// Asymptotic covariance `(G'WG)^{-1} G'W Sigma W G (G'WG)^{-1}`,
/// symmetrized.
pub fn omega(jacobian: &DMatrix<f64>, weight: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_shapes(jacobian, weight, sigma)?;
    let h = bread(jacobian, weight)?;
    let wg = weight * jacobian;
    let meat = wg.transpose() * sigma * &wg;
    Ok(symmetrize(&(&h * meat * &h)))
}

/// `sqrt(diag(Omega) / T)`.
pub fn std_errors(omega: &DMatrix<f64>, t: usize) -> Vec<f64> {
    (0..omega.nrows()).map(|k| (omega[(k, k)] / t as f64).sqrt()).collect()
}

/// `(theta_k - null_k) / sqrt(Omega_kk / T)`; entries with a non-positive
/// variance are NaN.
pub fn t_stats(theta: &[f64], null: &[f64], omega: &DMatrix<f64>, t: usize) -> Result<Vec<f64>> {
    if theta.len() != null.len() || omega.nrows() != theta.len() {
        return Err(Error::Dimension(format!(
            "{} estimates, {} null values, covariance {}x{}",
            theta.len(),
            null.len(),
            omega.nrows(),
            omega.ncols()
        )));
    }
    Ok(theta
        .iter()
        .zip(null)
        .enumerate()
        .map(|(k, (a, b))| {
            let v = omega[(k, k)];
            if v > 0.0 {
                (a - b) / (v / t as f64).sqrt()
            } else {
                f64::NAN
            }
        })
        .collect())
}
