use super::bank::DrawBank;
use super::spec::{FactorCopulaSpec, Family, ZFamily, ZMode};
use crate::dists::{SkewT, SkewTTable};
use crate::dists::{logabs_quantile_unchecked, ppnd16};
use crate::error::{Error, Result};

/// Values indexed by series, time and simulation slot, stored series-major:
/// `data[i T S + t S + s]`. Observed panels have `S = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    n: usize,
    t: usize,
    s: usize,
    data: Vec<f64>,
}

impl Panel {
    pub fn new(n: usize, t: usize, s: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * t * s {
            return Err(Error::Dimension(format!(
                "panel data has {} values, expected {n} x {t} x {s}",
                data.len()
            )));
        }
        Ok(Self { n, t, s, data })
    }

    /// Observed panel from one series per row.
    pub fn from_series(series: &[Vec<f64>]) -> Result<Self> {
        let n = series.len();
        let t = series.first().map_or(0, Vec::len);
        if let Some(i) = series.iter().position(|v| v.len() != t) {
            return Err(Error::Dimension(format!("series {i} has a different length")));
        }
        Ok(Self {
            n,
            t,
            s: 1,
            data: series.concat(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Series `i`, ordered by `(t, s)`.
    pub fn series(&self, i: usize) -> &[f64] {
        let c = self.t * self.s;
        &self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, t: usize, s: usize) -> f64 {
        self.data[(i * self.t + t) * self.s + s]
    }

    /// Applies `f` to every value (e.g. a strictly increasing transform).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Panel {
        Panel {
            data: self.data.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }
}

fn slot_error(spec: &FactorCopulaSpec, slot: usize, e: Error) -> Error {
    match e {
        Error::ParameterDomain { value, constraint, .. } => Error::ParameterDomain {
            name: spec.labels()[slot].clone(),
            value,
            constraint,
        },
        other => other,
    }
}

enum Quantile {
    Normal,
    Skew(SkewTTable),
}

impl Quantile {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        match self {
            Quantile::Normal => ppnd16(u, u - 0.5),
            Quantile::Skew(t) => t.quantile(u),
        }
    }
}

fn build_quantile(
    spec: &FactorCopulaSpec,
    full: &[f64],
    family: Family,
    first_slot: Option<usize>,
    reuse: &[&Quantile],
) -> Result<Quantile> {
    match (family, first_slot) {
        (Family::SkewT, Some(k)) => {
            let d = SkewT::new(full[k], full[k + 1]).map_err(|e| {
                let bad = if full[k] > 0.0 && full[k] < 0.5 { k + 1 } else { k };
                slot_error(spec, bad, e)
            })?;
            for q in reuse {
                if let Quantile::Skew(t) = q {
                    if t.dist().zeta().to_bits() == d.zeta().to_bits() {
                        return Ok(Quantile::Skew(SkewTTable::reusing(d, t)));
                    }
                }
            }
            Ok(Quantile::Skew(SkewTTable::new(d)))
        }
        _ => Ok(Quantile::Normal),
    }
}

/// Checks that the bank and the estimated factor fit the specification.
pub(crate) fn check_inputs(spec: &FactorCopulaSpec, z_hat: Option<&[f64]>, bank: &DrawBank) -> Result<()> {
    let d = bank.dims();
    if d.n != spec.n() {
        return Err(Error::Dimension(format!("bank has n = {}, spec has {}", d.n, spec.n())));
    }
    if d.p_alpha != spec.p_alpha() {
        return Err(Error::Dimension(format!(
            "bank has p_alpha = {}, spec has {}",
            d.p_alpha,
            spec.p_alpha()
        )));
    }
    if d.p_z != spec.p_z_simulable() {
        return Err(Error::Dimension(format!(
            "bank holds {} simulable Z components, spec needs {}",
            d.p_z,
            spec.p_z_simulable()
        )));
    }
    let needs_z = spec.z_mode() == ZMode::Estimable && spec.p_beta() > 0;
    match (needs_z, z_hat) {
        (true, Some(z)) if z.len() == d.t * spec.p_beta() => Ok(()),
        (true, Some(z)) => Err(Error::Dimension(format!(
            "estimated factor has {} values, expected T x p_beta = {}",
            z.len(),
            d.t * spec.p_beta()
        ))),
        (true, None) => Err(Error::Spec("estimable factor required but not supplied".into())),
        (false, Some(z)) if !z.is_empty() => Err(Error::Spec(
            "estimated factor supplied to a specification without estimable factors".into(),
        )),
        _ => Ok(()),
    }
}

/// Simulates `X[i,t,s] = alpha_q' F[t,s] + beta_q' Z + eps[i,t,s]` from the
/// stored uniforms at the free parameter vector `theta`. `z_hat` is the
/// `T x p_beta` row-major matrix of estimated factor innovations when `Z`
/// is estimable.
pub fn simulate_panel(
    spec: &FactorCopulaSpec,
    theta: &[f64],
    z_hat: Option<&[f64]>,
    bank: &DrawBank,
) -> Result<Panel> {
    check_inputs(spec, z_hat, bank)?;
    let full = spec.expand(theta)?;
    if let Some(k) = full.iter().position(|v| !v.is_finite()) {
        return Err(Error::ParameterDomain {
            name: spec.labels()[k].clone(),
            value: full[k],
            constraint: "finite",
        });
    }
    let d = bank.dims();
    let (cells, s_len) = (d.cells(), d.s);
    let (pa, pb) = (spec.p_alpha(), spec.p_beta());

    let mut factor_q: Vec<Quantile> = Vec::with_capacity(pa);
    for j in 0..pa {
        let reuse: Vec<&Quantile> = factor_q.iter().collect();
        let q = build_quantile(spec, &full, spec.factor_families()[j], spec.gamma_index(j), &reuse)?;
        factor_q.push(q);
    }
    let eps_q = {
        let reuse: Vec<&Quantile> = factor_q.iter().collect();
        build_quantile(spec, &full, spec.eps_family(), spec.delta_index(), &reuse)?
    };

    let fu = bank.factor_u();
    let mut f = vec![0.0; cells * pa];
    for c in 0..cells {
        for j in 0..pa {
            f[c * pa + j] = factor_q[j].eval(fu[c * pa + j]);
        }
    }
    let z: Vec<f64> = match spec.z_mode() {
        ZMode::Simulable(fam) => bank
            .z_u()
            .iter()
            .map(|&u| match fam {
                ZFamily::Normal => ppnd16(u, u - 0.5),
                ZFamily::LogAbsNormal => logabs_quantile_unchecked(u),
            })
            .collect(),
        ZMode::Estimable => z_hat.map(<[f64]>::to_vec).unwrap_or_default(),
    };
    let z_per_cell = matches!(spec.z_mode(), ZMode::Simulable(_));

    let mut common = vec![vec![0.0; cells]; spec.n_groups()];
    for (q, g) in common.iter_mut().enumerate() {
        let alpha: Vec<f64> = (0..pa).map(|j| full[spec.alpha_index(q, j)]).collect();
        let beta: Vec<f64> = (0..pb).map(|j| full[spec.beta_index(q, j)]).collect();
        for (c, out) in g.iter_mut().enumerate() {
            let mut v = 0.0;
            for j in 0..pa {
                v += alpha[j] * f[c * pa + j];
            }
            let zrow = if z_per_cell { c } else { c / s_len };
            for j in 0..pb {
                v += beta[j] * z[zrow * pb + j];
            }
            *out = v;
        }
    }

    let mut data = vec![0.0; spec.n() * cells];
    for (i, &q) in spec.group_of().iter().enumerate() {
        let u = bank.eps_series(i);
        let out = &mut data[i * cells..(i + 1) * cells];
        let g = &common[q];
        for c in 0..cells {
            out[c] = g[c] + eps_q.eval(u[c]);
        }
    }
    Panel::new(spec.n(), d.t, d.s, data)
}
