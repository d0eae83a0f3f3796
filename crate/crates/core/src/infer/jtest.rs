use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::linalg::sym_sqrt;
use super::sandwich::bread;
use crate::dists::ppnd16;
use crate::error::{Error, Result};
use crate::smm::quadratic_form;

/// Reference distribution of the overidentification statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JMode {
    /// Chi-square with `len - p` degrees of freedom (efficient weighting).
    Chi2,
    /// Simulated quadratic forms `u'A'Au` (any weighting).
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JTest {
    pub stat: f64,
    pub p_value: f64,
    pub mode: JMode,
    /// Overidentifying restrictions `len - p`.
    pub df: usize,
    pub n_draws: usize,
    pub warnings: Vec<String>,
}

/// The matrix `A = W^{1/2} (I - G (G'WG)^{-1} G'W) Sigma^{1/2}` whose
/// squared image of a standard normal vector is the limit law of `J`.
pub fn j_limit_matrix(
    weight: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    jacobian: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, Vec<String>)> {
    let l = jacobian.nrows();
    let h = bread(jacobian, weight)?;
    let proj = DMatrix::identity(l, l) - jacobian * h * jacobian.transpose() * weight;
    let (w_half, w_neg) = sym_sqrt(weight);
    let (s_half, s_neg) = sym_sqrt(sigma);
    let mut warnings = Vec::new();
    if w_neg {
        warnings.push("weight matrix has negative eigenvalues; clipped at zero".to_string());
    }
    if s_neg {
        warnings.push("covariance matrix has negative eigenvalues; clipped at zero".to_string());
    }
    Ok((w_half * proj * s_half, warnings))
}

/// Standard normal draws from a seeded stream.
fn normal_draws(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        let u = ((rng.next_u64() >> 12) as f64 + 0.5) / (1u64 << 52) as f64;
        *v = ppnd16(u, u - 0.5);
    }
}

/// Overidentification test: `J = T g'Wg` for the moment gap `g` at the
/// estimate, with a chi-square or simulated p-value.
#[allow(clippy::too_many_arguments)]
pub fn j_test(
    psi_gap: &[f64],
    weight: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    jacobian: &DMatrix<f64>,
    t: usize,
    mode: JMode,
    n_draws: usize,
    seed: u64,
) -> Result<JTest> {
    let l = psi_gap.len();
    let p = jacobian.ncols();
    if jacobian.nrows() != l || weight.shape() != (l, l) || sigma.shape() != (l, l) {
        return Err(Error::Dimension(format!(
            "gap of length {l}, Jacobian {:?}, weight {:?}, covariance {:?}",
            jacobian.shape(),
            weight.shape(),
            sigma.shape()
        )));
    }
    if p > l {
        return Err(Error::Spec(format!("{p} parameters exceed {l} moments")));
    }
    let stat = t as f64 * quadratic_form(weight, psi_gap);
    let df = l - p;
    let mut warnings = Vec::new();
    let p_value = if df == 0 {
        warnings.push("just identified: no overidentifying restrictions to test".to_string());
        1.0
    } else {
        match mode {
            JMode::Chi2 => {
                let chi = ChiSquared::new(df as f64).map_err(|e| Error::Numerical(e.to_string()))?;
                chi.sf(stat.max(0.0))
            }
            JMode::Simulated => {
                if n_draws == 0 {
                    return Err(Error::Domain("simulated J test needs at least one draw".into()));
                }
                let (a, w) = j_limit_matrix(weight, sigma, jacobian)?;
                warnings.extend(w);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut u = vec![0.0; l];
                let mut exceed = 0usize;
                for _ in 0..n_draws {
                    normal_draws(&mut rng, &mut u);
                    let au = &a * DVector::from_column_slice(&u);
                    if au.norm_squared() >= stat {
                        exceed += 1;
                    }
                }
                exceed as f64 / n_draws as f64
            }
        }
    };
    Ok(JTest {
        stat,
        p_value,
        mode,
        df,
        n_draws: if mode == JMode::Simulated { n_draws } else { 0 },
        warnings,
    })
}
