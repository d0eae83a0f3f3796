use serde::{Deserialize, Serialize};

use crate::depmeas::{Measure, MomentSpec};
use crate::error::{Error, Result};
use crate::margins::{FactorSource, VarianceSpec};
use crate::simcore::{FactorCopulaSpec, Family, ZFamily, ZMode};
use crate::smm::NelderMeadOptions;

/// Simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignId {
    /// One group, skewed-t factor and errors with a common `zeta`, normal `Z`.
    Design1,
    /// Three equal groups with their own latent loadings and a common `beta`.
    Design2,
    /// One latent factor only, separate tail parameters for factor and errors.
    #[serde(rename = "design1a", alias = "design1A")]
    Design1A,
    /// Symmetric skewed-t laws and a log-abs GARCH observable factor.
    #[serde(rename = "design1b", alias = "design1B")]
    Design1B,
}

impl DesignId {
    pub fn name(self) -> &'static str {
        match self {
            DesignId::Design1 => "design1",
            DesignId::Design2 => "design2",
            DesignId::Design1A => "design1A",
            DesignId::Design1B => "design1B",
        }
    }

    /// Number of free copula parameters.
    pub fn n_free(self) -> usize {
        match self {
            DesignId::Design2 => 6,
            _ => 4,
        }
    }
}

/// How the second factor enters the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McZMode {
    /// `Z` is recovered from an observed series and held fixed across draws.
    Observable,
    /// `Z` is drawn with the other shocks.
    Simulable,
}

/// AR(1)-GARCH(1,1) margins `(c, phi, omega, beta, alpha)` of the data.
pub const MARGIN_PARAMS: [f64; 5] = [0.01, 0.05, 0.05, 0.85, 0.1];
/// AR coefficient of the observed series driving `Z` in designs 1 and 2.
pub const Z_AR: f64 = 0.65;
/// GARCH `(omega, beta, alpha)` of the series driving `Z` in design 1B.
pub const Z_GARCH: [f64; 3] = [0.1, 0.1, 0.5];
pub const QDEP_WIDE: [f64; 6] = [0.15, 0.25, 0.35, 0.65, 0.75, 0.85];
pub const QDEP_NARROW: [f64; 2] = [0.15, 0.85];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McDesign {
    pub id: DesignId,
    pub z_mode: McZMode,
    pub n: usize,
    pub t: usize,
    pub s: usize,
    pub reps: usize,
    pub seed: u64,
    /// Nominal size of the t and J tests.
    pub level: f64,
    /// Discarded initial periods of every simulated time series.
    pub burn_in: usize,
    pub n_starts: usize,
    /// Start points refined before the final simplex search.
    pub n_candidates: usize,
    pub nelder_mead: NelderMeadOptions,
    pub bootstrap_reps: usize,
    pub pi_t: f64,
    pub n_draws: usize,
    /// Replaces the design's true parameters.
    pub truth: Option<Vec<f64>>,
}

impl Default for McDesign {
    fn default() -> Self {
        Self {
            id: DesignId::Design1,
            z_mode: McZMode::Observable,
            n: 15,
            t: 500,
            s: 25,
            reps: 100,
            seed: 0,
            level: 0.05,
            burn_in: 500,
            n_starts: 64,
            n_candidates: 8,
            nelder_mead: NelderMeadOptions::default(),
            bootstrap_reps: 500,
            pi_t: 0.05,
            n_draws: 1000,
            truth: None,
        }
    }
}

impl McDesign {
    pub fn new(id: DesignId, z_mode: McZMode, n: usize, t: usize) -> Self {
        Self {
            id,
            z_mode,
            n,
            t,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Spec(format!("need at least 2 series, got {}", self.n)));
        }
        if self.id == DesignId::Design2 && (!self.n.is_multiple_of(3) || self.n < 6) {
            return Err(Error::Spec(format!(
                "design2 splits the series into 3 equal groups of at least 2; n = {} does not",
                self.n
            )));
        }
        match (self.id, self.z_mode) {
            (DesignId::Design1A, McZMode::Observable) => {
                return Err(Error::Spec("design1A has no observable factor; use z_mode = simulable".into()))
            }
            (DesignId::Design1B, McZMode::Simulable) => {
                return Err(Error::Spec("design1B uses an observable factor; use z_mode = observable".into()))
            }
            _ => {}
        }
        if self.t < 10 || self.s == 0 || self.reps == 0 {
            return Err(Error::Spec(format!(
                "need T >= 10, S >= 1 and reps >= 1 (got T = {}, S = {}, reps = {})",
                self.t, self.s, self.reps
            )));
        }
        if let Some(t) = &self.truth {
            let spec = self.spec()?;
            if t.len() != spec.n_free() {
                return Err(Error::Spec(format!(
                    "truth has {} values, {} takes {} ({})",
                    t.len(),
                    self.id.name(),
                    spec.n_free(),
                    spec.free_labels().join(", ")
                )));
            }
            for (k, (v, (lo, hi))) in t.iter().zip(spec.free_bounds()).enumerate() {
                if !(*v >= lo && *v <= hi) {
                    return Err(Error::Spec(format!("true {} = {v} outside its box", spec.free_labels()[k])));
                }
            }
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Domain(format!("level {} must lie in (0, 1)", self.level)));
        }
        if self.bootstrap_reps < 2 || self.n_draws == 0 || !(self.pi_t > 0.0) {
            return Err(Error::Spec("need bootstrap_reps >= 2, n_draws >= 1 and pi_t > 0".into()));
        }
        Ok(())
    }

    /// Series-to-group map.
    pub fn groups(&self) -> Vec<usize> {
        match self.id {
            DesignId::Design2 => (0..self.n).map(|i| i / (self.n / 3)).collect(),
            _ => vec![0; self.n],
        }
    }

    fn estimator_z_mode(&self) -> ZMode {
        match self.z_mode {
            McZMode::Observable => ZMode::Estimable,
            McZMode::Simulable => ZMode::Simulable(ZFamily::Normal),
        }
    }

    fn build_spec(&self, z_mode: ZMode) -> Result<FactorCopulaSpec> {
        let group_of = self.groups();
        let p_beta = if self.id == DesignId::Design1A { 0 } else { 1 };
        let spec = FactorCopulaSpec::new(group_of, 1, p_beta, vec![Family::SkewT], Family::SkewT, z_mode)?;
        match self.id {
            DesignId::Design1 => spec.tie("delta.zeta", "gamma.1.zeta")?.fix("delta.xi", 0.0),
            DesignId::Design2 => spec
                .tie("beta.2.1", "beta.1.1")?
                .tie("beta.3.1", "beta.1.1")?
                .tie("delta.zeta", "gamma.1.zeta")?
                .fix("delta.xi", 0.0),
            DesignId::Design1A => spec.fix("delta.xi", 0.0),
            DesignId::Design1B => spec.fix("gamma.1.xi", 0.0)?.fix("delta.xi", 0.0),
        }
    }

    /// Copula specification used by the estimator.
    pub fn spec(&self) -> Result<FactorCopulaSpec> {
        self.build_spec(self.estimator_z_mode())
    }

    /// Specification generating the data: `Z` is always passed in.
    pub(crate) fn dgp_spec(&self) -> Result<FactorCopulaSpec> {
        self.build_spec(ZMode::Estimable)
    }

    /// True free parameters in the order of `spec().free_labels()`.
    pub fn theta0(&self) -> Vec<f64> {
        if let Some(t) = &self.truth {
            return t.clone();
        }
        match self.id {
            // alpha, beta, zeta, xi
            DesignId::Design1 => vec![1.0, 0.5, 0.25, -0.5],
            // alpha_1, beta, alpha_2, alpha_3, zeta, xi
            DesignId::Design2 => vec![2.0, 0.5, 1.5, 1.0, 0.25, -0.5],
            // alpha, zeta_F, xi, zeta_eps
            DesignId::Design1A => vec![1.5, 0.2, -0.2, 1.0 / 3.0],
            // alpha, beta, zeta_F, zeta_eps
            DesignId::Design1B => vec![1.25, 0.8, 0.2, 1.0 / 3.0],
        }
    }

    /// Spearman's rho and quantile dependence, pooled within each group.
    pub fn moment_spec(&self) -> Result<MomentSpec> {
        let taus: &[f64] = match self.id {
            DesignId::Design2 => &QDEP_NARROW,
            _ => &QDEP_WIDE,
        };
        let mut menu = vec![Measure::Spearman];
        menu.extend(taus.iter().map(|&t| Measure::Qdep(t)));
        MomentSpec::new(&menu, &self.groups())
    }

    /// Source model recovering `Z` from the observed factor series.
    pub(crate) fn factor_source(&self) -> Option<FactorSource> {
        match (self.id, self.z_mode) {
            (DesignId::Design1A, _) | (_, McZMode::Simulable) => None,
            (DesignId::Design1B, _) => Some(FactorSource::LogAbs(VarianceSpec::Garch)),
            _ => Some(FactorSource::Ar1),
        }
    }
}
