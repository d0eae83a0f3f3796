use serde::{Deserialize, Serialize};

use crate::dists::SkewT;
use crate::error::{Error, Result};

/// Conditional mean recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanSpec {
    /// No location: `y[t] = e[t]`.
    Zero,
    /// `c`
    Constant,
    /// `c + phi y[t-1]`
    Ar1,
    /// `c + phi y[t-1] + kappa x[t-1]`
    Ar1Exog,
}

/// Conditional variance recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceSpec {
    /// Constant scale `sigma` (parametrised as a standard deviation).
    Constant,
    /// `omega + beta s2[t-1] + alpha e2[t-1]`
    Garch,
    /// GARCH plus the leverage term `gamma e2[t-1] 1{e[t-1] < 0}`.
    Gjr,
    /// GJR plus `k1 x2[t-1] + k2 x2[t-1] 1{x[t-1] < 0}`.
    GjrExog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    /// Hansen skewed-t with `(zeta, xi)` appended to the parameter vector.
    SkewT,
}

impl MeanSpec {
    pub fn n_params(self) -> usize {
        match self {
            MeanSpec::Zero => 0,
            MeanSpec::Constant => 1,
            MeanSpec::Ar1 => 2,
            MeanSpec::Ar1Exog => 3,
        }
    }

    pub fn uses_exog(self) -> bool {
        matches!(self, MeanSpec::Ar1Exog)
    }

    fn names(self) -> &'static [&'static str] {
        &["c", "phi", "kappa"][..self.n_params()]
    }
}

impl VarianceSpec {
    pub fn n_params(self) -> usize {
        match self {
            VarianceSpec::Constant => 1,
            VarianceSpec::Garch => 3,
            VarianceSpec::Gjr => 4,
            VarianceSpec::GjrExog => 6,
        }
    }

    pub fn uses_exog(self) -> bool {
        matches!(self, VarianceSpec::GjrExog)
    }

    fn names(self) -> &'static [&'static str] {
        match self {
            VarianceSpec::Constant => &["sigma"],
            _ => &["omega", "beta", "alpha", "gamma", "k1", "k2"][..self.n_params()],
        }
    }
}

impl Innovation {
    pub fn n_params(self) -> usize {
        match self {
            Innovation::Gaussian => 0,
            Innovation::SkewT => 2,
        }
    }
}

/// The shape of a margin model: which recursions and which innovation law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginShape {
    pub mean: MeanSpec,
    pub variance: VarianceSpec,
    pub innovation: Innovation,
}

impl MarginShape {
    pub fn new(mean: MeanSpec, variance: VarianceSpec, innovation: Innovation) -> Self {
        Self {
            mean,
            variance,
            innovation,
        }
    }

    /// AR(1)-GARCH(1,1) with Gaussian quasi-likelihood.
    pub fn ar1_garch() -> Self {
        Self::new(MeanSpec::Ar1, VarianceSpec::Garch, Innovation::Gaussian)
    }

    pub fn uses_exog(&self) -> bool {
        self.mean.uses_exog() || self.variance.uses_exog()
    }

    /// Number of mean and variance parameters (excluding innovation shape).
    pub fn n_location_scale(&self) -> usize {
        self.mean.n_params() + self.variance.n_params()
    }

    pub fn n_params(&self) -> usize {
        self.n_location_scale() + self.innovation.n_params()
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = self.mean.names().to_vec();
        names.extend_from_slice(self.variance.names());
        if self.innovation == Innovation::SkewT {
            names.extend_from_slice(&["zeta", "xi"]);
        }
        names
    }
}

/// Recursion state entering the first filtered period: the lagged observation,
/// the lagged exogenous value and the first conditional variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub y_prev: f64,
    pub x_prev: f64,
    pub sigma2: f64,
}

/// Output of a filtering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub resid: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub eta: Vec<f64>,
}

/// A simulated path: observations with their residuals and variances.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub y: Vec<f64>,
    pub resid: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl SimulatedPath {
    /// State entering period `t` (`t >= 1`), for restarting the filter
    /// mid-path.
    pub fn state_at(&self, exog: Option<&[f64]>, t: usize) -> FilterState {
        FilterState {
            y_prev: self.y[t - 1],
            x_prev: exog.map_or(0.0, |x| x[t - 1]),
            sigma2: self.sigma2[t],
        }
    }
}

/// A fitted (or fully specified) parametric location-scale margin.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginModel {
    shape: MarginShape,
    lambda: Vec<f64>,
    innov: Option<SkewT>,
}

#[derive(Debug, Clone, Copy)]
struct VarParams {
    omega: f64,
    beta: f64,
    alpha: f64,
    gamma: f64,
    k1: f64,
    k2: f64,
}

fn domain(name: &str, value: f64, constraint: &'static str) -> Error {
    Error::ParameterDomain {
        name: name.to_string(),
        value,
        constraint,
    }
}

impl MarginModel {
    /// Validates positivity, leverage and stationarity constraints.
    pub fn new(shape: MarginShape, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != shape.n_params() {
            return Err(Error::Dimension(format!(
                "margin model needs {} parameters, got {}",
                shape.n_params(),
                lambda.len()
            )));
        }
        if let Some(bad) = lambda.iter().find(|v| !v.is_finite()) {
            return Err(domain("lambda", *bad, "finite"));
        }
        let m = shape.mean.n_params();
        if m > 1 && lambda[1].abs() >= 1.0 {
            return Err(domain("phi", lambda[1], "|phi| < 1"));
        }
        let v = &lambda[m..m + shape.variance.n_params()];
        match shape.variance {
            VarianceSpec::Constant => {
                if v[0] <= 0.0 {
                    return Err(domain("sigma", v[0], "sigma > 0"));
                }
            }
            _ => {
                if v[0] <= 0.0 {
                    return Err(domain("omega", v[0], "omega > 0"));
                }
                if v[1] < 0.0 {
                    return Err(domain("beta", v[1], "beta >= 0"));
                }
                if v[2] < 0.0 {
                    return Err(domain("alpha", v[2], "alpha >= 0"));
                }
                let gamma = v.get(3).copied().unwrap_or(0.0);
                if v[2] + gamma < 0.0 {
                    return Err(domain("gamma", gamma, "alpha + gamma >= 0"));
                }
                if v[1] + v[2] + 0.5 * gamma >= 1.0 {
                    return Err(domain(
                        "beta + alpha + gamma/2",
                        v[1] + v[2] + 0.5 * gamma,
                        "< 1",
                    ));
                }
                if shape.variance == VarianceSpec::GjrExog {
                    if v[4] < 0.0 {
                        return Err(domain("k1", v[4], "k1 >= 0"));
                    }
                    if v[4] + v[5] < 0.0 {
                        return Err(domain("k2", v[5], "k1 + k2 >= 0"));
                    }
                }
            }
        }
        let innov = match shape.innovation {
            Innovation::Gaussian => None,
            Innovation::SkewT => {
                let k = shape.n_location_scale();
                Some(SkewT::new(lambda[k], lambda[k + 1])?)
            }
        };
        Ok(Self {
            shape,
            lambda,
            innov,
        })
    }

    pub fn shape(&self) -> &MarginShape {
        &self.shape
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn innovation(&self) -> Option<&SkewT> {
        self.innov.as_ref()
    }

    fn mean_params(&self) -> (f64, f64, f64) {
        let l = &self.lambda;
        match self.shape.mean {
            MeanSpec::Zero => (0.0, 0.0, 0.0),
            MeanSpec::Constant => (l[0], 0.0, 0.0),
            MeanSpec::Ar1 => (l[0], l[1], 0.0),
            MeanSpec::Ar1Exog => (l[0], l[1], l[2]),
        }
    }

    fn var_params(&self) -> VarParams {
        let v = &self.lambda[self.shape.mean.n_params()..self.shape.n_location_scale()];
        let get = |k: usize| v.get(k).copied().unwrap_or(0.0);
        match self.shape.variance {
            VarianceSpec::Constant => VarParams {
                omega: v[0] * v[0],
                beta: 0.0,
                alpha: 0.0,
                gamma: 0.0,
                k1: 0.0,
                k2: 0.0,
            },
            _ => VarParams {
                omega: v[0],
                beta: v[1],
                alpha: v[2],
                gamma: get(3),
                k1: get(4),
                k2: get(5),
            },
        }
    }

    fn check_exog<'a>(&self, len: usize, exog: Option<&'a [f64]>) -> Result<&'a [f64]> {
        match (self.shape.uses_exog(), exog) {
            (true, Some(x)) if x.len() == len => Ok(x),
            (true, Some(x)) => Err(Error::Dimension(format!(
                "exogenous series has length {}, expected {len}",
                x.len()
            ))),
            (true, None) => Err(Error::Spec(
                "margin specification references an exogenous series but none was supplied".into(),
            )),
            (false, Some(_)) => Err(Error::Spec(
                "exogenous series supplied to a margin specification that does not use it".into(),
            )),
            (false, None) => Ok(&[]),
        }
    }

    /// Model-implied unconditional mean, with the exogenous regressor at its
    /// sample mean.
    fn unconditional_mean(&self, x: &[f64]) -> f64 {
        let (c, phi, kappa) = self.mean_params();
        let x_bar = if x.is_empty() {
            0.0
        } else {
            x.iter().sum::<f64>() / x.len() as f64
        };
        (c + kappa * x_bar) / (1.0 - phi)
    }

    /// Filters `y` into residuals, conditional variances and standardized
    /// innovations. Without an explicit state the first mean is the
    /// unconditional mean and the first variance the mean squared residual.
    pub fn filter(
        &self,
        y: &[f64],
        exog: Option<&[f64]>,
        init: Option<&FilterState>,
    ) -> Result<Filtered> {
        let x = self.check_exog(y.len(), exog)?;
        let n = y.len();
        if n == 0 {
            return Err(Error::Dimension("empty series".into()));
        }
        let (c, phi, kappa) = self.mean_params();
        let mut resid = Vec::with_capacity(n);
        for t in 0..n {
            let mu = if t == 0 {
                match init {
                    Some(s) => c + phi * s.y_prev + kappa * s.x_prev,
                    None => self.unconditional_mean(x),
                }
            } else {
                let xl = if x.is_empty() { 0.0 } else { x[t - 1] };
                c + phi * y[t - 1] + kappa * xl
            };
            resid.push(y[t] - mu);
        }
        let p = self.var_params();
        let mut sigma2 = Vec::with_capacity(n);
        let mut s2 = match (self.shape.variance, init) {
            (VarianceSpec::Constant, _) => p.omega,
            (_, Some(s)) => s.sigma2,
            (_, None) => resid.iter().map(|e| e * e).sum::<f64>() / n as f64,
        };
        for t in 0..n {
            if t > 0 && self.shape.variance != VarianceSpec::Constant {
                let e = resid[t - 1];
                let xl = if x.is_empty() { 0.0 } else { x[t - 1] };
                s2 = next_variance(&p, s2, e, xl);
            }
            if !(s2 > 0.0 && s2.is_finite()) {
                return Err(Error::Numerical(format!(
                    "nonpositive conditional variance {s2} at t = {t}"
                )));
            }
            sigma2.push(s2);
        }
        let eta = resid
            .iter()
            .zip(&sigma2)
            .map(|(e, s2)| e / s2.sqrt())
            .collect();
        Ok(Filtered { resid, sigma2, eta })
    }

    /// Standardized residuals only.
    pub fn filter_residuals(&self, y: &[f64], exog: Option<&[f64]>) -> Result<Vec<f64>> {
        Ok(self.filter(y, exog, None)?.eta)
    }

    /// Log-likelihood of `y` under the model's innovation law.
    pub fn log_likelihood(&self, y: &[f64], exog: Option<&[f64]>) -> Result<f64> {
        let f = self.filter(y, exog, None)?;
        Ok(self.log_likelihood_of(&f))
    }

    pub(crate) fn log_likelihood_of(&self, f: &Filtered) -> f64 {
        const LN_2PI: f64 = 1.837_877_066_409_345_5;
        match &self.innov {
            None => {
                -0.5 * f
                    .resid
                    .iter()
                    .zip(&f.sigma2)
                    .map(|(e, s2)| LN_2PI + s2.ln() + e * e / s2)
                    .sum::<f64>()
            }
            Some(d) => f
                .eta
                .iter()
                .zip(&f.sigma2)
                .map(|(z, s2)| d.ln_pdf(*z) - 0.5 * s2.ln())
                .sum(),
        }
    }

    /// Stationary starting state: unconditional mean and variance (exogenous
    /// contributions evaluated at their sample moments).
    pub fn stationary_state(&self, exog: Option<&[f64]>) -> FilterState {
        let x = exog.unwrap_or(&[]);
        let p = self.var_params();
        let sigma2 = match self.shape.variance {
            VarianceSpec::Constant => p.omega,
            _ => {
                let (mut m2, mut m2neg) = (0.0, 0.0);
                if !x.is_empty() {
                    m2 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
                    m2neg = x.iter().filter(|v| **v < 0.0).map(|v| v * v).sum::<f64>()
                        / x.len() as f64;
                }
                (p.omega + p.k1 * m2 + p.k2 * m2neg) / (1.0 - p.beta - p.alpha - 0.5 * p.gamma)
            }
        };
        let x_bar = if x.is_empty() {
            0.0
        } else {
            x.iter().sum::<f64>() / x.len() as f64
        };
        FilterState {
            y_prev: self.unconditional_mean(x),
            x_prev: x_bar,
            sigma2,
        }
    }

    /// Runs the recursions forward from `init` driven by the innovations `eta`.
    pub fn simulate(
        &self,
        eta: &[f64],
        exog: Option<&[f64]>,
        init: &FilterState,
    ) -> Result<SimulatedPath> {
        let x = self.check_exog(eta.len(), exog)?;
        let (c, phi, kappa) = self.mean_params();
        let p = self.var_params();
        let n = eta.len();
        let mut out = SimulatedPath {
            y: Vec::with_capacity(n),
            resid: Vec::with_capacity(n),
            sigma2: Vec::with_capacity(n),
        };
        let (mut y_prev, mut x_prev, mut s2) = (init.y_prev, init.x_prev, init.sigma2);
        for t in 0..n {
            if t > 0 && self.shape.variance != VarianceSpec::Constant {
                s2 = next_variance(&p, s2, out.resid[t - 1], x_prev);
            }
            let mu = c + phi * y_prev + kappa * x_prev;
            let e = s2.sqrt() * eta[t];
            out.y.push(mu + e);
            out.resid.push(e);
            out.sigma2.push(s2);
            y_prev = mu + e;
            if !x.is_empty() {
                x_prev = x[t];
            }
        }
        Ok(out)
    }
}

#[inline]
fn next_variance(p: &VarParams, s2: f64, e: f64, x: f64) -> f64 {
    let e2 = e * e;
    let x2 = x * x;
    let mut v = p.omega + p.beta * s2 + p.alpha * e2;
    if e < 0.0 {
        v += p.gamma * e2;
    }
    v += p.k1 * x2;
    if x < 0.0 {
        v += p.k2 * x2;
    }
    v
}
