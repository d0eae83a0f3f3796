use nalgebra::{DMatrix, SymmetricEigen};

use crate::depmeas::{empirical_moments, simulated_moments, MomentSpec};
use crate::error::{Error, Result};
use crate::simcore::{simulate_panel, DrawBank, FactorCopulaSpec, Panel};

/// Objective value for parameter vectors the simulator cannot use, plus
/// the distance to the box.
pub const PENALTY: f64 = 1e10;

/// Everything the SMM objective depends on: the factor copula layout, the
/// moment layout, the observed moments, the estimated factor, the fixed
/// draws and the weight matrix.
#[derive(Debug, Clone)]
pub struct SmmProblem {
    spec: FactorCopulaSpec,
    moment_spec: MomentSpec,
    psi_t: Vec<f64>,
    observed: Option<Panel>,
    z_hat: Option<Vec<f64>>,
    bank: DrawBank,
    weight: DMatrix<f64>,
    bounds: Vec<(f64, f64)>,
}

/// An objective value and whether it is a penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub penalized: bool,
}

pub(crate) fn check_weight(w: &DMatrix<f64>, len: usize) -> Result<()> {
    if w.nrows() != len || w.ncols() != len {
        return Err(Error::Dimension(format!(
            "weight matrix is {}x{}, moment vector has length {len}",
            w.nrows(),
            w.ncols()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("weight matrix has non-finite entries".into()));
    }
    let scale = w.amax().max(f64::MIN_POSITIVE);
    for i in 0..len {
        for j in 0..i {
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::Spec(format!("weight matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    let min = SymmetricEigen::new(w.clone()).eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::Spec(format!(
            "weight matrix not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

impl SmmProblem {
    /// Problem for an observed panel of filtered residuals (`S = 1`).
    /// `weight` defaults to the identity.
    pub fn new(
        spec: FactorCopulaSpec,
        moment_spec: MomentSpec,
        observed: Panel,
        z_hat: Option<Vec<f64>>,
        bank: DrawBank,
        weight: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        if observed.t() != bank.dims().t {
            return Err(Error::Dimension(format!(
                "observed panel has T = {}, draw bank has T = {}",
                observed.t(),
                bank.dims().t
            )));
        }
        let psi_t = empirical_moments(&observed, &moment_spec)?;
        let mut p = Self::from_moments(spec, moment_spec, psi_t, z_hat, bank, weight)?;
        p.observed = Some(observed);
        Ok(p)
    }

    /// Problem from a given target moment vector (no observed panel, so
    /// bootstrap-based steps are unavailable).
    pub fn from_moments(
        spec: FactorCopulaSpec,
        moment_spec: MomentSpec,
        psi_t: Vec<f64>,
        z_hat: Option<Vec<f64>>,
        bank: DrawBank,
        weight: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let len = moment_spec.len();
        if psi_t.len() != len {
            return Err(Error::Dimension(format!(
                "target moments have length {}, layout has {len}",
                psi_t.len()
            )));
        }
        if moment_spec.n_series() != spec.n() {
            return Err(Error::Dimension(format!(
                "moment layout covers {} series, factor spec has {}",
                moment_spec.n_series(),
                spec.n()
            )));
        }
        if spec.n_free() == 0 {
            return Err(Error::Spec("no free parameters".into()));
        }
        if len < spec.n_free() {
            return Err(Error::Spec(format!(
                "not identified: {len} moments for {} free parameters",
                spec.n_free()
            )));
        }
        crate::simcore::check_inputs(&spec, z_hat.as_deref(), &bank)?;
        let weight = weight.unwrap_or_else(|| DMatrix::identity(len, len));
        check_weight(&weight, len)?;
        let bounds = spec.free_bounds();
        Ok(Self {
            spec,
            moment_spec,
            psi_t,
            observed: None,
            z_hat,
            bank,
            weight,
            bounds,
        })
    }

    /// Same problem with another weight matrix.
    pub fn with_weight(&self, weight: DMatrix<f64>) -> Result<Self> {
        check_weight(&weight, self.moment_spec.len())?;
        Ok(Self {
            weight,
            ..self.clone()
        })
    }

    pub fn spec(&self) -> &FactorCopulaSpec {
        &self.spec
    }

    pub fn moment_spec(&self) -> &MomentSpec {
        &self.moment_spec
    }

    pub fn psi_t(&self) -> &[f64] {
        &self.psi_t
    }

    pub fn observed(&self) -> Option<&Panel> {
        self.observed.as_ref()
    }

    pub fn z_hat(&self) -> Option<&[f64]> {
        self.z_hat.as_deref()
    }

    pub fn bank(&self) -> &DrawBank {
        &self.bank
    }

    pub fn weight(&self) -> &DMatrix<f64> {
        &self.weight
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn n_free(&self) -> usize {
        self.spec.n_free()
    }

    /// Number of time periods.
    pub fn t(&self) -> usize {
        self.bank.dims().t
    }

    pub fn simulate(&self, theta: &[f64]) -> Result<Panel> {
        simulate_panel(&self.spec, theta, self.z_hat.as_deref(), &self.bank)
    }

    /// Simulated moment vector at `theta`.
    pub fn simulated_moments(&self, theta: &[f64]) -> Result<Vec<f64>> {
        simulated_moments(&self.simulate(theta)?, &self.moment_spec)
    }

    /// Moment gap `psi_T - psi_TS(theta)`.
    pub fn gap(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let sim = self.simulated_moments(theta)?;
        Ok(self.psi_t.iter().zip(&sim).map(|(a, b)| a - b).collect())
    }

    /// `g' W g` in a fixed summation order.
    pub fn quadratic_form(&self, g: &[f64]) -> f64 {
        quadratic_form(&self.weight, g)
    }

    fn box_distance(&self, theta: &[f64]) -> f64 {
        theta
            .iter()
            .zip(&self.bounds)
            .map(|(x, (lo, hi))| {
                let d = if x.is_nan() {
                    f64::INFINITY
                } else if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Objective with a flag for penalized values. Points outside the box or
    /// rejected by the simulator get `PENALTY + distance to the box`.
    pub fn evaluate(&self, theta: &[f64]) -> Evaluation {
        if theta.len() != self.n_free() {
            return Evaluation {
                value: f64::INFINITY,
                penalized: true,
            };
        }
        let d = self.box_distance(theta);
        if d > 0.0 {
            return Evaluation {
                value: PENALTY + d,
                penalized: true,
            };
        }
        match self.gap(theta) {
            Ok(g) => Evaluation {
                value: self.quadratic_form(&g),
                penalized: false,
            },
            Err(_) => Evaluation {
                value: PENALTY,
                penalized: true,
            },
        }
    }

    pub fn objective(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta).value
    }
}

pub(crate) fn quadratic_form(w: &DMatrix<f64>, g: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, gi) in g.iter().enumerate() {
        let mut row = 0.0;
        for (j, gj) in g.iter().enumerate() {
            row += w[(i, j)] * gj;
        }
        total += gi * row;
    }
    total
}
