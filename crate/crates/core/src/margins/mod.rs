//! Parametric location-scale margins and estimable factors.
//!
//! A margin maps an observed series into standardized innovations
//! `eta[t] = (y[t] - mu[t]) / s[t]` through AR-type mean and GARCH-type
//! variance recursions. Parameters are fitted by (quasi-)maximum likelihood
//! with a quasi-Newton search on an unconstrained reparametrisation.

mod bfgs;
mod factor;
mod fit;
mod model;

pub use factor::{apply_factor_source, estimable_factor, EstimatedFactor, FactorSource, FactorSourceModel, LOG_ABS_FLOOR};
pub use fit::{fit_margin, fit_margin_with, FitDiagnostics, FitOptions};
pub use model::{
    FilterState, Filtered, Innovation, MarginModel, MarginShape, MeanSpec, SimulatedPath, VarianceSpec,
};

/// Standardized residuals of `y` under a fitted model.
pub fn filter_residuals(y: &[f64], exog: Option<&[f64]>, model: &MarginModel) -> crate::Result<Vec<f64>> {
    model.filter_residuals(y, exog)
}
