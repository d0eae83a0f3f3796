use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution family of a latent factor or of the idiosyncratic errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Standard normal, no shape parameters.
    Normal,
    /// Hansen skewed-t with slots `(zeta, xi)`.
    SkewT,
}

impl Family {
    pub fn n_slots(self) -> usize {
        match self {
            Family::Normal => 0,
            Family::SkewT => 2,
        }
    }
}

/// Law of a simulable observable factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZFamily {
    Normal,
    /// `log|Z|` with `Z` standard normal.
    LogAbsNormal,
}

/// How the `p_beta` observable factors enter the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "family")]
pub enum ZMode {
    /// Estimated innovations `z_hat[t]` supplied by the caller and shared by
    /// all `s` at a given `t`.
    Estimable,
    /// Drawn from the stored uniforms, one draw per `(t, s)` cell.
    Simulable(ZFamily),
}

/// Role of one slot of the full parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Slot {
    /// Estimated; index into the free vector.
    Free(usize),
    Fixed(f64),
    /// Equal to another slot of the full vector (which is free or fixed).
    Tied(usize),
}

/// Factor copula structure: group partition, loading layout, distribution
/// families and the map from free parameters to the full vector
/// `(alpha_1, beta_1, ..., alpha_Q, beta_Q, gamma, delta)`.
///
/// Slot labels: `alpha.q.j`, `beta.q.j` (1-based group and factor),
/// `gamma.j.zeta`, `gamma.j.xi` for skewed-t latent factors, and
/// `delta.zeta`, `delta.xi` for skewed-t errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorCopulaSpec {
    group_of: Vec<usize>,
    n_groups: usize,
    p_alpha: usize,
    p_beta: usize,
    factor_families: Vec<Family>,
    eps_family: Family,
    z_mode: ZMode,
    labels: Vec<String>,
    slots: Vec<Slot>,
    /// Box for every slot; only free slots' boxes are used.
    bounds: Vec<(f64, f64)>,
}

pub const LOADING_BOUND: f64 = 10.0;
pub const ZETA_BOUNDS: (f64, f64) = (0.01, 0.49);
pub const XI_BOUNDS: (f64, f64) = (-0.95, 0.95);

impl FactorCopulaSpec {
    /// All slots free with default boxes. `group_of[i]` is the 0-based group
    /// of series `i`; every group must be nonempty.
    ///
    /// Default loading boxes are `[-10, 10]` except where a sign flip leaves
    /// the copula unchanged: the first group's `alpha` is restricted to
    /// `[0, 10]` (flipping a latent factor flips its skewness and every
    /// group's loading), and likewise the first group's `beta`, whose sign
    /// the rank moments cannot see when the observable factor is symmetric.
    /// Widen with [`FactorCopulaSpec::with_bounds`] when a negative first
    /// loading on an asymmetric factor is plausible.
    pub fn new(
        group_of: Vec<usize>,
        p_alpha: usize,
        p_beta: usize,
        factor_families: Vec<Family>,
        eps_family: Family,
        z_mode: ZMode,
    ) -> Result<Self> {
        if group_of.len() < 2 {
            return Err(Error::Spec("need at least two series".into()));
        }
        let n_groups = group_of.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; n_groups];
        for &g in &group_of {
            sizes[g] += 1;
        }
        if let Some(q) = sizes.iter().position(|&c| c == 0) {
            return Err(Error::Spec(format!("group {} has no members", q + 1)));
        }
        if p_alpha == 0 {
            return Err(Error::Spec("need at least one latent factor".into()));
        }
        if factor_families.len() != p_alpha {
            return Err(Error::Spec(format!(
                "{} factor families given for p_alpha = {p_alpha}",
                factor_families.len()
            )));
        }
        let mut labels = Vec::new();
        let mut bounds = Vec::new();
        let lb = (-LOADING_BOUND, LOADING_BOUND);
        let pos = (0.0, LOADING_BOUND);
        for q in 0..n_groups {
            for j in 0..p_alpha {
                labels.push(format!("alpha.{}.{}", q + 1, j + 1));
                bounds.push(if q == 0 { pos } else { lb });
            }
            for j in 0..p_beta {
                labels.push(format!("beta.{}.{}", q + 1, j + 1));
                bounds.push(if q == 0 { pos } else { lb });
            }
        }
        for (j, fam) in factor_families.iter().enumerate() {
            if *fam == Family::SkewT {
                labels.push(format!("gamma.{}.zeta", j + 1));
                bounds.push(ZETA_BOUNDS);
                labels.push(format!("gamma.{}.xi", j + 1));
                bounds.push(XI_BOUNDS);
            }
        }
        if eps_family == Family::SkewT {
            labels.push("delta.zeta".into());
            bounds.push(ZETA_BOUNDS);
            labels.push("delta.xi".into());
            bounds.push(XI_BOUNDS);
        }
        let slots = (0..labels.len()).map(Slot::Free).collect();
        Ok(Self {
            group_of,
            n_groups,
            p_alpha,
            p_beta,
            factor_families,
            eps_family,
            z_mode,
            labels,
            slots,
            bounds,
        })
    }

    fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Spec(format!("unknown parameter slot `{label}`")))
    }

    fn renumber(&mut self) {
        let mut next = 0;
        for k in 0..self.slots.len() {
            if let Slot::Free(_) = self.slots[k] {
                self.slots[k] = Slot::Free(next);
                next += 1;
            }
        }
    }

    /// Fixes a slot at a value.
    pub fn fix(mut self, label: &str, value: f64) -> Result<Self> {
        let k = self.index_of(label)?;
        if self.slots.contains(&Slot::Tied(k)) {
            return Err(Error::Spec(format!("`{label}` is a tie target; fix before tying")));
        }
        self.slots[k] = Slot::Fixed(value);
        self.renumber();
        Ok(self)
    }

    /// Ties `label` to `target` (which must itself be free or fixed).
    pub fn tie(mut self, label: &str, target: &str) -> Result<Self> {
        let k = self.index_of(label)?;
        let m = self.index_of(target)?;
        if k == m {
            return Err(Error::Spec(format!("`{label}` cannot be tied to itself")));
        }
        if let Slot::Tied(_) = self.slots[m] {
            return Err(Error::Spec(format!("tie target `{target}` is itself tied")));
        }
        if self.slots.contains(&Slot::Tied(k)) {
            return Err(Error::Spec(format!("`{label}` is already a tie target")));
        }
        self.slots[k] = Slot::Tied(m);
        self.renumber();
        Ok(self)
    }

    pub fn with_bounds(mut self, label: &str, lo: f64, hi: f64) -> Result<Self> {
        let k = self.index_of(label)?;
        if !(lo < hi) {
            return Err(Error::Spec(format!("empty box [{lo}, {hi}] for `{label}`")));
        }
        self.bounds[k] = (lo, hi);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.group_of.len()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    /// Members of each group in ascending order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.n_groups];
        for (i, &q) in self.group_of.iter().enumerate() {
            g[q].push(i);
        }
        g
    }

    pub fn p_alpha(&self) -> usize {
        self.p_alpha
    }

    pub fn p_beta(&self) -> usize {
        self.p_beta
    }

    pub fn factor_families(&self) -> &[Family] {
        &self.factor_families
    }

    pub fn eps_family(&self) -> Family {
        self.eps_family
    }

    pub fn z_mode(&self) -> ZMode {
        self.z_mode
    }

    /// Simulable `Z` components needed in the draw bank.
    pub fn p_z_simulable(&self) -> usize {
        match self.z_mode {
            ZMode::Simulable(_) => self.p_beta,
            ZMode::Estimable => 0,
        }
    }

    pub fn full_len(&self) -> usize {
        self.slots.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn n_free(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s, Slot::Free(_))).count()
    }

    /// Labels of the free parameters in free-vector order.
    pub fn free_labels(&self) -> Vec<String> {
        self.free_slots().into_iter().map(|k| self.labels[k].clone()).collect()
    }

    fn free_slots(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_free()];
        for (k, s) in self.slots.iter().enumerate() {
            if let Slot::Free(f) = s {
                out[*f] = k;
            }
        }
        out
    }

    /// Box of each free parameter.
    pub fn free_bounds(&self) -> Vec<(f64, f64)> {
        self.free_slots().into_iter().map(|k| self.bounds[k]).collect()
    }

    /// Expands a free vector into the full parameter vector.
    pub fn expand(&self, free: &[f64]) -> Result<Vec<f64>> {
        if free.len() != self.n_free() {
            return Err(Error::Dimension(format!(
                "expected {} free parameters, got {}",
                self.n_free(),
                free.len()
            )));
        }
        let mut full = vec![0.0; self.slots.len()];
        for (k, s) in self.slots.iter().enumerate() {
            match s {
                Slot::Free(f) => full[k] = free[*f],
                Slot::Fixed(v) => full[k] = *v,
                Slot::Tied(_) => {}
            }
        }
        for (k, s) in self.slots.iter().enumerate() {
            if let Slot::Tied(m) = s {
                full[k] = full[*m];
            }
        }
        Ok(full)
    }

    /// Free vector from a full vector (ties and fixed values ignored).
    pub fn restrict(&self, full: &[f64]) -> Result<Vec<f64>> {
        if full.len() != self.slots.len() {
            return Err(Error::Dimension(format!(
                "expected {} full parameters, got {}",
                self.slots.len(),
                full.len()
            )));
        }
        Ok(self.free_slots().into_iter().map(|k| full[k]).collect())
    }

    /// Full-vector index of `alpha.q.j` (0-based q, j).
    pub(crate) fn alpha_index(&self, q: usize, j: usize) -> usize {
        q * (self.p_alpha + self.p_beta) + j
    }

    pub(crate) fn beta_index(&self, q: usize, j: usize) -> usize {
        q * (self.p_alpha + self.p_beta) + self.p_alpha + j
    }

    /// Full-vector index of the first shape slot of latent factor `j`.
    pub(crate) fn gamma_index(&self, j: usize) -> Option<usize> {
        if self.factor_families[j] != Family::SkewT {
            return None;
        }
        let before = self.factor_families[..j]
            .iter()
            .map(|f| f.n_slots())
            .sum::<usize>();
        Some(self.n_groups * (self.p_alpha + self.p_beta) + before)
    }

    pub(crate) fn delta_index(&self) -> Option<usize> {
        (self.eps_family == Family::SkewT).then(|| self.slots.len() - 2)
    }
}
