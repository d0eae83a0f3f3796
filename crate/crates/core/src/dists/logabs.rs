use libm::erf;

use super::normal::ppnd16;
use crate::error::{check_open_unit, Result};

/// Mean of `log|Z|`, `Z ~ N(0,1)`: `(-euler_gamma - ln 2) / 2`.
pub const LOGABS_MEAN: f64 = -0.635_181_422_730_739_1;
/// Variance of `log|Z|`: `pi^2 / 8`.
pub const LOGABS_VAR: f64 = std::f64::consts::PI * std::f64::consts::PI / 8.0;

/// Density of `log|Z|`: `sqrt(2 exp(2z - exp(2z)) / pi)`.
pub fn logabsnormal_pdf(z: f64) -> f64 {
    (2.0 * (2.0 * z - (2.0 * z).exp()).exp() / std::f64::consts::PI).sqrt()
}

/// `P(log|Z| <= z) = erf(e^z / sqrt 2)`.
pub fn logabsnormal_cdf(z: f64) -> f64 {
    erf(z.exp() * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn logabsnormal_quantile(u: f64) -> Result<f64> {
    check_open_unit("u", u)?;
    Ok(logabs_quantile_unchecked(u))
}

#[inline]
pub(crate) fn logabs_quantile_unchecked(u: f64) -> f64 {
    // |Z| <= q  <=>  Phi(q) = (1 + u) / 2, offset from 1/2 is exactly u / 2
    ppnd16(0.5 + 0.5 * u, 0.5 * u).ln()
}
