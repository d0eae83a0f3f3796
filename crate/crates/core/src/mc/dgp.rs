use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::design::{DesignId, McDesign, McZMode, MARGIN_PARAMS, Z_AR, Z_GARCH};
use crate::dists::{logabsnormal_quantile, normal_quantile, SkewT};
use crate::error::{Error, Result};
use crate::margins::{MarginModel, MarginShape, MeanSpec, VarianceSpec, Innovation};
use crate::seeds::{derive_seed, purpose};
use crate::simcore::{make_draw_bank, open_uniform, simulate_panel, BankDims, Panel};

const F_NODES: usize = 400;
const Z_NODES: usize = 32;
const GRID: usize = 1024;

/// Marginal CDF of `a F + b Z + eps` by midpoint quadrature over the
/// factor laws, tabulated on a grid and interpolated linearly inside it.
#[derive(Debug, Clone)]
pub struct MarginalCdf {
    shifts: Vec<f64>,
    eps: SkewT,
    x: Vec<f64>,
    u: Vec<f64>,
}

fn midpoints(m: usize, q: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    (0..m).map(|k| q((k as f64 + 0.5) / m as f64)).collect()
}

impl MarginalCdf {
    /// `z_nodes` are quantile midpoints of `Z` (empty without a second factor).
    pub fn new(a: f64, b: f64, factor: &SkewT, eps: SkewT, z_nodes: &[f64]) -> Result<Self> {
        let f = midpoints(F_NODES, |u| factor.quantile(u))?;
        let mut shifts = Vec::with_capacity(F_NODES * z_nodes.len().max(1));
        for fv in &f {
            if z_nodes.is_empty() {
                shifts.push(a * fv);
            } else {
                shifts.extend(z_nodes.iter().map(|z| a * fv + b * z));
            }
        }
        let lo = shifts.iter().copied().fold(f64::INFINITY, f64::min) + eps.quantile(1e-3)?;
        let hi = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max) + eps.quantile(1.0 - 1e-3)?;
        let mut cdf = Self {
            shifts,
            eps,
            x: Vec::new(),
            u: Vec::new(),
        };
        cdf.x = (0..GRID).map(|k| lo + (hi - lo) * k as f64 / (GRID - 1) as f64).collect();
        cdf.u = cdf.x.iter().map(|&x| cdf.direct(x)).collect();
        Ok(cdf)
    }

    fn direct(&self, x: f64) -> f64 {
        self.shifts.iter().map(|c| self.eps.cdf(x - c)).sum::<f64>() / self.shifts.len() as f64
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = (self.x[0], self.x[GRID - 1]);
        if !(x > lo && x < hi) {
            return self.direct(x);
        }
        let h = (hi - lo) / (GRID - 1) as f64;
        let k = (((x - lo) / h) as usize).min(GRID - 2);
        let w = (x - self.x[k]) / (self.x[k + 1] - self.x[k]);
        self.u[k] + w.clamp(0.0, 1.0) * (self.u[k + 1] - self.u[k])
    }
}

/// One simulated data set: observed returns and the observed factor series.
#[derive(Debug, Clone)]
pub struct McData {
    /// `n` return series of length `T`.
    pub y: Vec<Vec<f64>>,
    /// Series from which `Z` is recovered (observable designs).
    pub w: Option<Vec<f64>>,
}

/// Per-design constants reused by every replication.
#[derive(Debug, Clone)]
pub struct Dgp {
    design: McDesign,
    /// Marginal CDF per group.
    cdfs: Vec<MarginalCdf>,
    margin: MarginModel,
    z_garch: Option<MarginModel>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    normal_quantile(open_uniform(rng.next_u64())).expect("open uniform")
}

impl Dgp {
    pub fn new(design: &McDesign) -> Result<Self> {
        design.validate()?;
        let spec = design.dgp_spec()?;
        let full = spec.expand(&design.theta0())?;
        let labels = spec.labels();
        let get = |l: &str| full[labels.iter().position(|x| x == l).expect("slot")];
        let factor = SkewT::new(get("gamma.1.zeta"), get("gamma.1.xi"))?;
        let eps = SkewT::new(get("delta.zeta"), get("delta.xi"))?;
        let z_nodes = match design.id {
            DesignId::Design1A => Vec::new(),
            DesignId::Design1B => midpoints(Z_NODES, logabsnormal_quantile)?,
            _ => midpoints(Z_NODES, normal_quantile)?,
        };
        let cdfs = (0..spec.n_groups())
            .map(|q| {
                let a = get(&format!("alpha.{}.1", q + 1));
                let b = if z_nodes.is_empty() { 0.0 } else { get(&format!("beta.{}.1", q + 1)) };
                MarginalCdf::new(a, b, &factor, eps, &z_nodes)
            })
            .collect::<Result<_>>()?;
        let margin = MarginModel::new(MarginShape::ar1_garch(), MARGIN_PARAMS.to_vec())?;
        let z_garch = if design.id == DesignId::Design1B {
            let shape = MarginShape::new(MeanSpec::Zero, VarianceSpec::Garch, Innovation::Gaussian);
            Some(MarginModel::new(shape, Z_GARCH.to_vec())?)
        } else {
            None
        };
        Ok(Self {
            design: design.clone(),
            cdfs,
            margin,
            z_garch,
        })
    }

    /// Draws the factor path `Z` (length `T`) and, for observable designs,
    /// the series it is recovered from.
    fn factor_path(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let d = &self.design;
        let (burn, t) = (d.burn_in, d.t);
        match d.id {
            DesignId::Design1A => Ok((Vec::new(), None)),
            DesignId::Design1B => {
                let model = self.z_garch.as_ref().expect("design1B variance model");
                let shocks: Vec<f64> = (0..burn + t).map(|_| normal(rng)).collect();
                let path = model.simulate(&shocks, None, &model.stationary_state(None))?;
                let z = shocks[burn..].iter().map(|v| v.abs().ln()).collect();
                Ok((z, Some(path.y[burn..].to_vec())))
            }
            _ => {
                let mut w = 0.0;
                let mut z = Vec::with_capacity(t);
                let mut ws = Vec::with_capacity(t);
                for k in 0..burn + t {
                    let e = normal(rng);
                    w = Z_AR * w + e;
                    if k >= burn {
                        z.push(e);
                        ws.push(w);
                    }
                }
                let w = (d.z_mode == McZMode::Observable).then_some(ws);
                Ok((z, w))
            }
        }
    }

    /// Simulates one data set from the replication seed.
    pub fn simulate(&self, rep_seed: u64) -> Result<McData> {
        let d = &self.design;
        let data_seed = derive_seed(rep_seed, &[purpose::DATA]);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(data_seed, &[1]));
        let (z, w) = self.factor_path(&mut rng)?;
        let spec = d.dgp_spec()?;
        let bank = make_draw_bank(BankDims::new(d.n, d.t, 1, 1), data_seed)?;
        let z_arg = (!z.is_empty()).then_some(z.as_slice());
        let x: Panel = simulate_panel(&spec, &d.theta0(), z_arg, &bank)?;
        let groups = d.groups();
        let mut y = Vec::with_capacity(d.n);
        for i in 0..d.n {
            let cdf = &self.cdfs[groups[i]];
            let mut eta: Vec<f64> = (0..d.burn_in).map(|_| normal(&mut rng)).collect();
            for &xv in x.series(i) {
                let u = cdf.cdf(xv).clamp(1e-15, 1.0 - 1e-15);
                eta.push(normal_quantile(u)?);
            }
            let path = self.margin.simulate(&eta, None, &self.margin.stationary_state(None))?;
            if path.y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite simulated return in series {i}")));
            }
            y.push(path.y[d.burn_in..].to_vec());
        }
        Ok(McData { y, w })
    }
}
