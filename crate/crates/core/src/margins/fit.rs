use nalgebra::DMatrix;

use super::bfgs::{minimize, BfgsOptions};
use super::model::{Innovation, MarginModel, MarginShape, MeanSpec, VarianceSpec};
use crate::error::{Error, Result};

/// Diagnostics of a likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Some constraint is (numerically) active at the optimum.
    pub at_boundary: bool,
    /// Inverse-Hessian standard errors, when the Hessian is invertible.
    pub std_errors: Option<Vec<f64>>,
}

/// Options for [`fit_margin_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub gtol: f64,
    pub max_iter: usize,
    pub std_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-8,
            max_iter: 500,
            std_errors: true,
        }
    }
}

fn softplus(u: f64) -> f64 {
    if u > 30.0 {
        u
    } else {
        u.exp().ln_1p()
    }
}

fn softplus_inv(v: f64) -> f64 {
    let v = v.max(1e-10);
    if v > 30.0 {
        v
    } else {
        v.exp_m1().ln()
    }
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

const ZETA_MAX: f64 = 0.49;

/// Maps unconstrained coordinates onto the admissible parameter region.
pub(crate) fn to_natural(shape: &MarginShape, u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len());
    let m = shape.mean.n_params();
    if m > 0 {
        out.push(u[0]);
    }
    if m > 1 {
        out.push(u[1].tanh());
    }
    if m > 2 {
        out.push(u[2]);
    }
    let v = &u[m..];
    match shape.variance {
        VarianceSpec::Constant => out.push(v[0].exp()),
        var => {
            out.push(v[0].exp());
            // (beta, A) on the open simplex, A = alpha + gamma / 2
            let (e1, e2) = (v[1].exp(), v[2].exp());
            let denom = 1.0 + e1 + e2;
            let beta = e1 / denom;
            let a = e2 / denom;
            let gamma = if var == VarianceSpec::Garch {
                0.0
            } else {
                2.0 * a * v[3].tanh()
            };
            out.push(beta);
            out.push(a - 0.5 * gamma);
            if var != VarianceSpec::Garch {
                out.push(gamma);
            }
            if var == VarianceSpec::GjrExog {
                let k1 = softplus(v[4]);
                out.push(k1);
                out.push(softplus(v[5]) - k1);
            }
        }
    }
    if shape.innovation == Innovation::SkewT {
        let k = shape.n_location_scale();
        out.push(ZETA_MAX * logistic(u[k]));
        out.push(u[k + 1].tanh());
    }
    out
}

/// Inverse of [`to_natural`], clamping values that sit on a constraint.
pub(crate) fn to_free(shape: &MarginShape, lambda: &[f64]) -> Vec<f64> {
    let clamp_unit = |x: f64| x.clamp(-1.0 + 1e-9, 1.0 - 1e-9);
    let mut out = Vec::with_capacity(lambda.len());
    let m = shape.mean.n_params();
    if m > 0 {
        out.push(lambda[0]);
    }
    if m > 1 {
        out.push(clamp_unit(lambda[1]).atanh());
    }
    if m > 2 {
        out.push(lambda[2]);
    }
    let v = &lambda[m..];
    match shape.variance {
        VarianceSpec::Constant => out.push(v[0].ln()),
        var => {
            out.push(v[0].ln());
            let gamma = if var == VarianceSpec::Garch { 0.0 } else { v[3] };
            let beta = v[1].max(1e-8);
            let a = (v[2] + 0.5 * gamma).max(1e-8);
            let rest = (1.0 - beta - a).max(1e-8);
            out.push((beta / rest).ln());
            out.push((a / rest).ln());
            if var != VarianceSpec::Garch {
                out.push(clamp_unit(gamma / (2.0 * a)).atanh());
            }
            if var == VarianceSpec::GjrExog {
                out.push(softplus_inv(v[4]));
                out.push(softplus_inv(v[4] + v[5]));
            }
        }
    }
    if shape.innovation == Innovation::SkewT {
        let k = shape.n_location_scale();
        let z = (lambda[k] / ZETA_MAX).clamp(1e-9, 1.0 - 1e-9);
        out.push((z / (1.0 - z)).ln());
        out.push(clamp_unit(lambda[k + 1]).atanh());
    }
    out
}

fn start_values(shape: &MarginShape, y: &[f64], exog: Option<&[f64]>) -> Vec<f64> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut lambda = Vec::with_capacity(shape.n_params());
    let phi = if shape.mean.n_params() < 2 {
        0.0
    } else {
        let cov = y
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / n;
        (cov / var).clamp(-0.5, 0.5)
    };
    if shape.mean != MeanSpec::Zero {
        lambda.push(mean * (1.0 - phi));
    }
    if shape.mean.n_params() > 1 {
        lambda.push(phi);
    }
    if shape.mean == MeanSpec::Ar1Exog {
        lambda.push(0.0);
    }
    match shape.variance {
        VarianceSpec::Constant => lambda.push(var.sqrt()),
        var_spec => {
            lambda.extend_from_slice(&[0.1 * var, 0.8, 0.1]);
            if var_spec != VarianceSpec::Garch {
                lambda.push(0.0);
            }
            if var_spec == VarianceSpec::GjrExog {
                let x = exog.unwrap_or(&[]);
                let m2 = x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64;
                let k1 = if m2 > 0.0 { 0.01 * var / m2 } else { 0.01 };
                lambda.extend_from_slice(&[k1, 0.0]);
            }
        }
    }
    if shape.innovation == Innovation::SkewT {
        lambda.extend_from_slice(&[0.1, 0.0]);
    }
    lambda
}

fn boundary_active(shape: &MarginShape, u: &[f64]) -> bool {
    let m = shape.mean.n_params();
    if m > 1 && u[1].abs() > 7.0 {
        return true;
    }
    if shape.variance != VarianceSpec::Constant {
        let v = &u[m..];
        if v[1] < -15.0 || v[2] < -15.0 || v[1].max(v[2]) > 15.0 {
            return true;
        }
        if shape.variance != VarianceSpec::Garch && v[3].abs() > 7.0 {
            return true;
        }
        if shape.variance == VarianceSpec::GjrExog && (v[4] < -15.0 || v[5] < -15.0) {
            return true;
        }
    }
    if shape.innovation == Innovation::SkewT {
        let k = shape.n_location_scale();
        if u[k].abs() > 15.0 || u[k + 1].abs() > 7.0 {
            return true;
        }
    }
    false
}

/// Inverse-Hessian standard errors in the natural parametrisation.
fn hessian_std_errors(model: &MarginModel, y: &[f64], exog: Option<&[f64]>) -> Option<Vec<f64>> {
    let lam = model.lambda().to_vec();
    let p = lam.len();
    let shape = *model.shape();
    let ll = |l: &[f64]| {
        MarginModel::new(shape, l.to_vec())
            .and_then(|m| m.log_likelihood(y, exog))
            .unwrap_or(f64::NAN)
    };
    let h: Vec<f64> = lam.iter().map(|v| 1e-4 * v.abs().max(1e-2)).collect();
    let f0 = ll(&lam);
    let mut hess = DMatrix::zeros(p, p);
    let mut x = lam.clone();
    for i in 0..p {
        for j in i..p {
            let val = if i == j {
                x[i] = lam[i] + h[i];
                let fp = ll(&x);
                x[i] = lam[i] - h[i];
                let fm = ll(&x);
                x[i] = lam[i];
                (fp - 2.0 * f0 + fm) / (h[i] * h[i])
            } else {
                let mut eval = |si: f64, sj: f64| {
                    x[i] = lam[i] + si * h[i];
                    x[j] = lam[j] + sj * h[j];
                    let v = ll(&x);
                    x[i] = lam[i];
                    x[j] = lam[j];
                    v
                };
                (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                    / (4.0 * h[i] * h[j])
            };
            hess[(i, j)] = -val;
            hess[(j, i)] = -val;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let cov = hess.try_inverse()?;
    let se: Vec<f64> = (0..p).map(|k| cov[(k, k)]).collect();
    if se.iter().all(|v| *v > 0.0) {
        Some(se.into_iter().map(f64::sqrt).collect())
    } else {
        None
    }
}

/// Maximum (quasi-)likelihood fit of a margin model.
pub fn fit_margin(y: &[f64], exog: Option<&[f64]>, shape: MarginShape) -> Result<(MarginModel, FitDiagnostics)> {
    fit_margin_with(y, exog, shape, &FitOptions::default())
}

pub fn fit_margin_with(
    y: &[f64],
    exog: Option<&[f64]>,
    shape: MarginShape,
    opts: &FitOptions,
) -> Result<(MarginModel, FitDiagnostics)> {
    if y.len() < 50 {
        return Err(Error::Domain(format!(
            "margin fit needs at least 50 observations, got {}",
            y.len()
        )));
    }
    if let Some(t) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite observation at t = {t}")));
    }
    match (shape.uses_exog(), exog) {
        (true, None) => {
            return Err(Error::Spec(
                "margin specification references an exogenous series but none was supplied".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(Error::Spec(
                "exogenous series supplied to a margin specification that does not use it".into(),
            ))
        }
        _ => {}
    }
    let n = y.len() as f64;
    let u0 = to_free(&shape, &start_values(&shape, y, exog));
    let objective = |u: &[f64]| {
        MarginModel::new(shape, to_natural(&shape, u))
            .and_then(|m| m.log_likelihood(y, exog))
            .map(|ll| -ll / n)
            .unwrap_or(f64::INFINITY)
    };
    let out = minimize(
        objective,
        &u0,
        &BfgsOptions {
            gtol: opts.gtol,
            max_iter: opts.max_iter,
        },
    );
    if !out.f.is_finite() {
        return Err(Error::Numerical("likelihood not finite at any trial point".into()));
    }
    let model = MarginModel::new(shape, to_natural(&shape, &out.x))?;
    let loglik = -out.f * n;
    if !out.converged {
        return Err(Error::FitNonConvergence {
            iterations: out.iterations,
            best: model.lambda().to_vec(),
            loglik,
        });
    }
    let std_errors = if opts.std_errors {
        hessian_std_errors(&model, y, exog)
    } else {
        None
    };
    let diag = FitDiagnostics {
        loglik,
        iterations: out.iterations,
        converged: out.converged,
        at_boundary: boundary_active(&shape, &out.x),
        std_errors,
    };
    Ok((model, diag))
}
