use serde::{Deserialize, Serialize};

use super::measures::kendall_score;
use super::rank::RankIndex;
use crate::error::{Error, Result};
use crate::simcore::Panel;

/// A bivariate rank dependence measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Spearman,
    /// Quantile dependence at level `tau`.
    Qdep(f64),
    Kendall,
}

impl Measure {
    fn rank_key(&self) -> (u8, f64) {
        match self {
            Measure::Spearman => (0, 0.0),
            Measure::Qdep(t) => (1, *t),
            Measure::Kendall => (2, 0.0),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Measure::Spearman => "spearman".into(),
            Measure::Qdep(t) => format!("qdep({t})"),
            Measure::Kendall => "kendall".into(),
        }
    }
}

/// Measure list and block partition; fixes the layout of the moment vector
/// (block-major, measure-minor).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSpec {
    measures: Vec<Measure>,
    blocks: Vec<Vec<usize>>,
    n: usize,
    /// Distinct quantile levels, ascending.
    taus: Vec<f64>,
    /// For each measure, its position in `taus` when it is a `Qdep`.
    tau_slot: Vec<Option<usize>>,
    has_spearman: bool,
}

impl MomentSpec {
    /// Measures in canonical order (Spearman, quantile dependence by
    /// ascending level, Kendall), replicated for every group of `group_of`.
    pub fn new(measures: &[Measure], group_of: &[usize]) -> Result<Self> {
        let mut m = measures.to_vec();
        m.sort_by(|a, b| {
            let (ka, ta) = a.rank_key();
            let (kb, tb) = b.rank_key();
            ka.cmp(&kb).then(ta.total_cmp(&tb))
        });
        Self::with_order(&m, group_of)
    }

    /// Measures kept in the order given.
    pub fn with_order(measures: &[Measure], group_of: &[usize]) -> Result<Self> {
        let n_groups = group_of.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); n_groups];
        for (i, &q) in group_of.iter().enumerate() {
            blocks[q].push(i);
        }
        Self::build(measures.to_vec(), blocks, group_of.len())
    }

    /// One block containing all `n` series.
    pub fn pooled(measures: &[Measure], n: usize) -> Result<Self> {
        Self::new(measures, &vec![0; n])
    }

    fn build(measures: Vec<Measure>, blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::Spec("empty measure list".into()));
        }
        for (q, b) in blocks.iter().enumerate() {
            if b.len() < 2 {
                return Err(Error::Spec(format!(
                    "group {} has {} member(s); every group needs at least 2",
                    q + 1,
                    b.len()
                )));
            }
        }
        let mut seen: Vec<(u8, u64)> = Vec::new();
        let mut taus = Vec::new();
        for m in &measures {
            if let Measure::Qdep(t) = m {
                if !(*t > 0.0 && *t < 1.0) {
                    return Err(Error::Spec(format!("quantile level {t} outside (0, 1)")));
                }
                taus.push(*t);
            }
            let (k, t) = m.rank_key();
            if seen.contains(&(k, t.to_bits())) {
                return Err(Error::Spec(format!("measure {} listed twice", m.label())));
            }
            seen.push((k, t.to_bits()));
        }
        taus.sort_by(f64::total_cmp);
        let tau_slot = measures
            .iter()
            .map(|m| match m {
                Measure::Qdep(t) => taus.iter().position(|x| x == t),
                _ => None,
            })
            .collect();
        let has_spearman = measures.contains(&Measure::Spearman);
        Ok(Self {
            has_spearman,
            measures,
            blocks,
            n,
            taus,
            tau_slot,
        })
    }

    pub fn measures(&self) -> &[Measure] {
        &self.measures
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_series(&self) -> usize {
        self.n
    }

    /// Measures per block.
    pub fn per_block(&self) -> usize {
        self.measures.len()
    }

    /// Total length of the moment vector.
    pub fn len(&self) -> usize {
        self.blocks.len() * self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `q<k>.<measure>` labels in layout order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len());
        for q in 0..self.blocks.len() {
            for m in &self.measures {
                out.push(format!("q{}.{}", q + 1, m.label()));
            }
        }
        out
    }

    /// Pairs `(a, b)`, `a < b`, of each block in enumeration order.
    pub fn block_pairs(&self, q: usize) -> Vec<(usize, usize)> {
        let b = &self.blocks[q];
        let mut out = Vec::with_capacity(b.len() * (b.len() - 1) / 2);
        for x in 0..b.len() {
            for y in x + 1..b.len() {
                out.push((b[x], b[y]));
            }
        }
        out
    }

    fn has_qdep(&self) -> bool {
        !self.taus.is_empty()
    }

    fn has_kendall(&self) -> bool {
        self.measures.contains(&Measure::Kendall)
    }

    /// For each quantile level, the largest doubled rank whose
    /// pseudo-observation `r2 / (2 (N + 1))` is `<= tau` (same float
    /// comparison as the definition).
    pub(crate) fn cuts(&self, n_obs: usize) -> Vec<u32> {
        let denom = 2.0 * (n_obs + 1) as f64;
        self.taus
            .iter()
            .map(|&tau| {
                let mut c = (tau * denom).floor().max(0.0) as u32;
                while c > 0 && (c as f64 / denom) > tau {
                    c -= 1;
                }
                while ((c + 1) as f64 / denom) <= tau {
                    c += 1;
                }
                c
            })
            .collect()
    }

    /// Tail indicator bitsets of one series, one block of `ceil(N / 64)`
    /// words per quantile level: `u <= tau` below the median, `u > tau`
    /// above it.
    pub(crate) fn tail_bits(&self, r2: &[u32], cuts: &[u32]) -> Vec<u64> {
        let words = r2.len().div_ceil(64);
        let mut bits = vec![0u64; words * self.taus.len()];
        for (k, (&tau, &cut)) in self.taus.iter().zip(cuts).enumerate() {
            let block = &mut bits[k * words..(k + 1) * words];
            let lower = tau <= 0.5;
            for (w, chunk) in r2.chunks(64).enumerate() {
                let mut word = 0u64;
                for (b, &r) in chunk.iter().enumerate() {
                    let hit = if lower { r <= cut } else { r > cut };
                    word |= (hit as u64) << b;
                }
                block[w] = word;
            }
        }
        bits
    }

    /// Integer statistics of one pair, added into `acc`.
    pub(crate) fn accumulate_pair(&self, ra: &[u32], rb: &[u32], ba: &[u64], bb: &[u64], acc: &mut PairStats) {
        if self.has_spearman {
            // at most 4 N^3, exact in u64 for N below 1.6e6
            let s: u64 = ra.iter().zip(rb).map(|(&a, &b)| a as u64 * b as u64).sum();
            acc.rank_product += s as u128;
        }
        if self.has_qdep() {
            let words = ra.len().div_ceil(64);
            for (k, t) in acc.tail.iter_mut().enumerate() {
                let x = &ba[k * words..(k + 1) * words];
                let y = &bb[k * words..(k + 1) * words];
                *t += x.iter().zip(y).map(|(a, b)| (a & b).count_ones() as u64).sum::<u64>();
            }
        }
        if self.has_kendall() {
            acc.concordance += kendall_score(ra, rb) as i128;
        }
        acc.pairs += 1;
    }

    /// Measure values from statistics summed over `acc.pairs` pairs of
    /// `n_obs` observations each.
    pub(crate) fn finish(&self, acc: &PairStats, n_obs: usize, out: &mut [f64]) {
        let n = n_obs as f64;
        let p = acc.pairs as f64;
        for (m, (slot, o)) in self.measures.iter().zip(self.tau_slot.iter().zip(out.iter_mut())) {
            *o = match m {
                // 12/N sum(u v) - 3 with u v = r2_a r2_b / (4 (N+1)^2)
                Measure::Spearman => 3.0 * acc.rank_product as f64 / (p * n * (n + 1.0) * (n + 1.0)) - 3.0,
                Measure::Qdep(tau) => {
                    let c = acc.tail[slot.expect("qdep slot")] as f64;
                    if *tau <= 0.5 {
                        c / (p * n * tau)
                    } else {
                        c / (p * n * (1.0 - tau))
                    }
                }
                Measure::Kendall => acc.concordance as f64 / (p * n * (n - 1.0) / 2.0),
            };
        }
    }

    pub(crate) fn new_stats(&self) -> PairStats {
        PairStats {
            rank_product: 0,
            tail: vec![0; self.taus.len()],
            concordance: 0,
            pairs: 0,
        }
    }

    /// Tail bitsets of every rank vector (empty when no quantile dependence
    /// measure is requested).
    pub(crate) fn all_tail_bits(&self, ranks: &[Vec<u32>], n_obs: usize) -> Vec<Vec<u64>> {
        if !self.has_qdep() {
            return vec![Vec::new(); ranks.len()];
        }
        let cuts = self.cuts(n_obs);
        ranks.iter().map(|r| self.tail_bits(r, &cuts)).collect()
    }

    /// Moment vector from per-series doubled ranks over `n_obs` observations.
    pub(crate) fn moments_of_ranks(&self, ranks: &[Vec<u32>], n_obs: usize) -> Vec<f64> {
        let bits = self.all_tail_bits(ranks, n_obs);
        let l = self.per_block();
        let mut out = vec![0.0; self.len()];
        for q in 0..self.blocks.len() {
            let mut acc = self.new_stats();
            for (a, b) in self.block_pairs(q) {
                self.accumulate_pair(&ranks[a], &ranks[b], &bits[a], &bits[b], &mut acc);
            }
            self.finish(&acc, n_obs, &mut out[q * l..(q + 1) * l]);
        }
        out
    }
}

/// Exact integer statistics summed over pairs: rank-product sum, joint tail
/// counts per quantile level, and concordant-minus-discordant count.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PairStats {
    rank_product: u128,
    tail: Vec<u64>,
    concordance: i128,
    pairs: u64,
}

fn check_panel(panel: &Panel, spec: &MomentSpec) -> Result<()> {
    if panel.n() != spec.n_series() {
        return Err(Error::Dimension(format!(
            "panel has {} series, moment specification expects {}",
            panel.n(),
            spec.n_series()
        )));
    }
    if panel.t() * panel.s() < 2 {
        return Err(Error::Domain("need at least 2 observations per series".into()));
    }
    if let Some(k) = panel.data().iter().position(|v| v.is_nan()) {
        return Err(Error::Domain(format!(
            "NaN in panel (series {})",
            k / (panel.t() * panel.s())
        )));
    }
    Ok(())
}

/// Per-series rank indices of a panel, pooled over `(t, s)`.
pub(crate) fn rank_indices(panel: &Panel) -> Vec<RankIndex> {
    (0..panel.n()).map(|i| RankIndex::new(panel.series(i))).collect()
}

/// Aggregated dependence measures of an observed `n x T` panel.
pub fn empirical_moments(panel: &Panel, spec: &MomentSpec) -> Result<Vec<f64>> {
    if panel.s() != 1 {
        return Err(Error::Dimension(format!(
            "observed panel must have S = 1, got {}",
            panel.s()
        )));
    }
    simulated_moments(panel, spec)
}

/// Aggregated dependence measures of a simulated panel, ranking each series
/// over all `T S` cells.
pub fn simulated_moments(panel: &Panel, spec: &MomentSpec) -> Result<Vec<f64>> {
    check_panel(panel, spec)?;
    let ranks: Vec<Vec<u32>> = rank_indices(panel).iter().map(RankIndex::doubled_ranks).collect();
    Ok(spec.moments_of_ranks(&ranks, panel.t() * panel.s()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_layout() {
        let spec = MomentSpec::new(
            &[Measure::Kendall, Measure::Qdep(0.85), Measure::Spearman, Measure::Qdep(0.15)],
            &[0, 0, 1, 1, 1],
        )
        .unwrap();
        assert_eq!(
            spec.measures(),
            [Measure::Spearman, Measure::Qdep(0.15), Measure::Qdep(0.85), Measure::Kendall]
        );
        assert_eq!(spec.len(), 8);
        assert_eq!(spec.labels()[4], "q2.spearman");
        assert_eq!(spec.block_pairs(1), [(2, 3), (2, 4), (3, 4)]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(MomentSpec::new(&[Measure::Spearman], &[0, 1, 1]).is_err());
        assert!(MomentSpec::new(&[Measure::Qdep(1.2)], &[0, 0]).is_err());
        assert!(MomentSpec::new(&[Measure::Qdep(0.2), Measure::Qdep(0.2)], &[0, 0]).is_err());
        assert!(MomentSpec::new(&[], &[0, 0]).is_err());
    }

    #[test]
    fn tail_bits_match_float_comparison() {
        let taus = [0.15, 0.25, 0.85];
        let spec = MomentSpec::pooled(&taus.map(Measure::Qdep), 2).unwrap();
        for n_obs in [7usize, 99, 100, 101, 12_500] {
            let r2: Vec<u32> = (1..=n_obs as u32).rev().map(|r| 2 * r).collect();
            let bits = spec.tail_bits(&r2, &spec.cuts(n_obs));
            let words = n_obs.div_ceil(64);
            for (k, tau) in taus.iter().enumerate() {
                for (t, r) in r2.iter().enumerate() {
                    let u = *r as f64 / (2.0 * (n_obs + 1) as f64);
                    let want = if *tau <= 0.5 { u <= *tau } else { u > *tau };
                    let got = bits[k * words + t / 64] >> (t % 64) & 1 == 1;
                    assert_eq!(got, want);
                }
            }
        }
    }
}
