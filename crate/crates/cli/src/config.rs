use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fcsmm::depmeas::{Measure, MomentSpec};
use fcsmm::infer::BootstrapMode;
use fcsmm::margins::{FactorSource, Innovation, MarginShape, MeanSpec, VarianceSpec};
use fcsmm::mc::McDesign;
use fcsmm::simcore::{FactorCopulaSpec, Family, ZMode};
use fcsmm::smm::NelderMeadOptions;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Filter,
    Estimate,
    Montecarlo,
    Jtest,
}

/// Contents of the configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub data: DataConfig,
    pub margins: MarginsConfig,
    pub factor: Option<FactorConfig>,
    pub copula: CopulaConfig,
    pub moments: MomentsConfig,
    pub estimation: EstimationConfig,
    pub montecarlo: Option<McDesign>,
    pub jtest: JtestConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Return series, one column per asset.
    pub returns: Option<PathBuf>,
    /// Modeled columns; all numeric columns when absent.
    pub columns: Option<Vec<String>>,
    /// Standardized residuals written by `filter`, used instead of `returns`.
    pub residuals: Option<PathBuf>,
    /// Estimated factor written by `filter`, used with `residuals`.
    pub factor_residuals: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeConfig {
    pub mean: MeanSpec,
    pub variance: VarianceSpec,
    pub innovation: Innovation,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        Self {
            mean: MeanSpec::Ar1,
            variance: VarianceSpec::Garch,
            innovation: Innovation::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginsConfig {
    #[serde(flatten)]
    pub default: ShapeConfig,
    /// Column holding the exogenous regressor of `ar1_exog` / `gjr_exog`.
    pub exog: Option<String>,
    /// Per-column overrides.
    pub series: BTreeMap<String, ShapeConfig>,
}

impl MarginsConfig {
    pub fn shape_of(&self, column: &str) -> MarginShape {
        let s = self.series.get(column).unwrap_or(&self.default);
        MarginShape::new(s.mean, s.variance, s.innovation)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    /// Column of the observed factor series.
    pub column: String,
    /// File holding the column; the returns file when absent.
    pub file: Option<PathBuf>,
    pub source: FactorSource,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CopulaConfig {
    /// Column names per group; one group of all columns when empty.
    pub groups: Vec<Vec<String>>,
    pub p_alpha: usize,
    /// Defaults to 1 with a `[factor]` block, 0 without.
    pub p_beta: Option<usize>,
    pub factor_families: Vec<Family>,
    pub eps_family: Family,
    pub z_mode: ZMode,
    /// `slot = target`: the slot takes the target's value.
    pub ties: BTreeMap<String, String>,
    pub fixed: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, [f64; 2]>,
}

impl Default for CopulaConfig {
    fn default() -> Self {
        Self {
            groups: Vec::new(),
            p_alpha: 1,
            p_beta: None,
            factor_families: vec![Family::SkewT],
            eps_family: Family::SkewT,
            z_mode: ZMode::Estimable,
            ties: BTreeMap::new(),
            fixed: BTreeMap::new(),
            bounds: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub spearman: bool,
    pub kendall: bool,
    pub quantiles: Vec<f64>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self {
            spearman: true,
            kendall: false,
            quantiles: fcsmm::mc::QDEP_WIDE.to_vec(),
        }
    }
}

impl MomentsConfig {
    pub fn measures(&self) -> Vec<Measure> {
        let mut m = Vec::new();
        if self.spearman {
            m.push(Measure::Spearman);
        }
        m.extend(self.quantiles.iter().map(|&t| Measure::Qdep(t)));
        if self.kendall {
            m.push(Measure::Kendall);
        }
        m
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    pub s: usize,
    pub n_starts: usize,
    pub n_candidates: usize,
    pub two_step: bool,
    pub bootstrap_reps: usize,
    pub bootstrap_mode: BootstrapMode,
    pub pi_t: f64,
    pub n_draws: usize,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            s: 25,
            n_starts: 64,
            n_candidates: 8,
            two_step: false,
            bootstrap_reps: 500,
            bootstrap_mode: BootstrapMode::Joint,
            pi_t: 0.05,
            n_draws: 1000,
            nelder_mead: NelderMeadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JModeChoice {
    /// Chi-square after two-step estimation, simulated otherwise.
    #[default]
    Auto,
    Chi2,
    Simulated,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JtestConfig {
    /// Directory with the estimation artifacts; the output directory when absent.
    pub artifacts: Option<PathBuf>,
    pub n_draws: Option<usize>,
    pub mode: JModeChoice,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Relative paths are taken relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p {
                if x.is_relative() {
                    *x = base.join(&*x);
                }
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.data.returns);
        fix(&mut self.data.residuals);
        fix(&mut self.data.factor_residuals);
        fix(&mut self.jtest.artifacts);
        if let Some(f) = &mut self.factor {
            fix(&mut f.file);
        }
    }

    pub fn check_mode(&self, wanted: Mode) -> Result<(), CliError> {
        match self.mode {
            Some(m) if m != wanted => Err(CliError::Config(format!(
                "config declares mode {m:?} but the {wanted:?} subcommand was run"
            ))),
            _ => Ok(()),
        }
    }

    /// Series-to-group map for the modeled columns.
    pub fn group_of(&self, columns: &[String]) -> Result<Vec<usize>, CliError> {
        if self.copula.groups.is_empty() {
            return Ok(vec![0; columns.len()]);
        }
        let mut group_of = vec![usize::MAX; columns.len()];
        for (q, g) in self.copula.groups.iter().enumerate() {
            for name in g {
                let i = columns
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| CliError::Config(format!("group {} names unknown column `{name}`", q + 1)))?;
                if group_of[i] != usize::MAX {
                    return Err(CliError::Config(format!("column `{name}` is in more than one group")));
                }
                group_of[i] = q;
            }
        }
        if let Some(i) = group_of.iter().position(|&q| q == usize::MAX) {
            return Err(CliError::Config(format!("column `{}` is not in any group", columns[i])));
        }
        Ok(group_of)
    }

    pub fn p_beta(&self) -> usize {
        self.copula
            .p_beta
            .unwrap_or(if self.factor.is_some() || self.data.factor_residuals.is_some() { 1 } else { 0 })
    }

    /// Copula specification with ties, fixed values and boxes applied.
    pub fn copula_spec(&self, columns: &[String]) -> Result<FactorCopulaSpec, CliError> {
        let c = &self.copula;
        let mut spec = FactorCopulaSpec::new(
            self.group_of(columns)?,
            c.p_alpha,
            self.p_beta(),
            c.factor_families.clone(),
            c.eps_family,
            c.z_mode,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        for (label, value) in &c.fixed {
            spec = spec.fix(label, *value).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for (label, target) in &c.ties {
            spec = spec.tie(label, target).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for (label, [lo, hi]) in &c.bounds {
            spec = spec.with_bounds(label, *lo, *hi).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(spec)
    }

    pub fn moment_spec(&self, columns: &[String]) -> Result<MomentSpec, CliError> {
        MomentSpec::new(&self.moments.measures(), &self.group_of(columns)?).map_err(|e| CliError::Config(e.to_string()))
    }
}
