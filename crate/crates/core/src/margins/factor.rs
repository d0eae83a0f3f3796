use serde::{Deserialize, Serialize};

use super::fit::{fit_margin_with, FitOptions};
use super::model::{Innovation, MarginModel, MarginShape, MeanSpec, VarianceSpec};
use crate::error::{Error, Result};

/// Location model turning an observed series `W` into i.i.d. factor
/// innovations `Z = W - sigma(M, nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorSource {
    /// `sigma = 0`: the observed series is the factor.
    Identity,
    /// `W[t] = nu W[t-1] + Z[t]`, no intercept; `nu` by least squares.
    Ar1,
    /// `W~[t] = s[t] Z~[t]` with a GARCH-type variance; the factor is
    /// `log|W~[t]| - log s[t]`.
    LogAbs(VarianceSpec),
}

/// Values `|W~[t]|` below this are replaced before taking logs.
pub const LOG_ABS_FLOOR: f64 = 1e-12;

/// A fitted factor source.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSourceModel {
    pub source: FactorSource,
    /// `nu_hat`: the AR coefficient, or the variance parameters.
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedFactor {
    pub model: FactorSourceModel,
    pub z_hat: Vec<f64>,
    /// Number of observations floored at [`LOG_ABS_FLOOR`].
    pub floored: usize,
}

/// Fits the factor source model and returns the estimated innovations.
pub fn estimable_factor(w: &[f64], exog: Option<&[f64]>, source: FactorSource) -> Result<EstimatedFactor> {
    if w.is_empty() {
        return Err(Error::Dimension("empty factor series".into()));
    }
    if let Some(t) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite factor observation at t = {t}")));
    }
    match source {
        FactorSource::Identity => Ok(EstimatedFactor {
            model: FactorSourceModel { source, nu: vec![] },
            z_hat: w.to_vec(),
            floored: 0,
        }),
        FactorSource::Ar1 => {
            if w.len() < 3 {
                return Err(Error::Domain("AR(1) factor needs at least 3 observations".into()));
            }
            let (num, den) = w
                .windows(2)
                .fold((0.0, 0.0), |(a, b), p| (a + p[0] * p[1], b + p[0] * p[0]));
            if den <= 0.0 {
                return Err(Error::Numerical("degenerate AR(1) regressor".into()));
            }
            let nu = num / den;
            let mut z_hat = Vec::with_capacity(w.len());
            z_hat.push(w[0]);
            z_hat.extend(w.windows(2).map(|p| p[1] - nu * p[0]));
            Ok(EstimatedFactor {
                model: FactorSourceModel { source, nu: vec![nu] },
                z_hat,
                floored: 0,
            })
        }
        FactorSource::LogAbs(variance) => {
            if variance == VarianceSpec::Constant {
                return Err(Error::Spec("log-abs factor source needs a GARCH-type variance".into()));
            }
            let shape = MarginShape::new(MeanSpec::Zero, variance, Innovation::Gaussian);
            let opts = FitOptions {
                std_errors: false,
                ..FitOptions::default()
            };
            let (model, _) = fit_margin_with(w, exog, shape, &opts)?;
            let filtered = model.filter(w, exog, None)?;
            let mut floored = 0;
            let z_hat = w
                .iter()
                .zip(&filtered.sigma2)
                .map(|(v, s2)| {
                    let mut a = v.abs();
                    if a < LOG_ABS_FLOOR {
                        a = LOG_ABS_FLOOR;
                        floored += 1;
                    }
                    a.ln() - 0.5 * s2.ln()
                })
                .collect();
            Ok(EstimatedFactor {
                model: FactorSourceModel {
                    source,
                    nu: model.lambda().to_vec(),
                },
                z_hat,
                floored,
            })
        }
    }
}

/// Re-applies a fitted source model to a series without refitting.
pub fn apply_factor_source(w: &[f64], exog: Option<&[f64]>, model: &FactorSourceModel) -> Result<Vec<f64>> {
    match model.source {
        FactorSource::Identity => Ok(w.to_vec()),
        FactorSource::Ar1 => {
            let nu = model.nu[0];
            let mut z = Vec::with_capacity(w.len());
            if let Some(first) = w.first() {
                z.push(*first);
            }
            z.extend(w.windows(2).map(|p| p[1] - nu * p[0]));
            Ok(z)
        }
        FactorSource::LogAbs(variance) => {
            let shape = MarginShape::new(MeanSpec::Zero, variance, Innovation::Gaussian);
            let m = MarginModel::new(shape, model.nu.clone())?;
            let f = m.filter(w, exog, None)?;
            Ok(w
                .iter()
                .zip(&f.sigma2)
                .map(|(v, s2)| v.abs().max(LOG_ABS_FLOOR).ln() - 0.5 * s2.ln())
                .collect())
        }
    }
}
