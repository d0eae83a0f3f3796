use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depmeas::{MomentSpec, RankIndex};
use crate::error::{Error, Result};
use crate::simcore::Panel;

/// How time indices are shared within a bootstrap replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapMode {
    /// One index vector for all series, pairs and groups.
    #[default]
    Joint,
    /// A separate index vector for every pair.
    PerPair,
}

fn check(eta: &Panel, x: &Panel, spec: &MomentSpec) -> Result<()> {
    if eta.s() != 1 {
        return Err(Error::Dimension(format!("observed panel must have S = 1, got {}", eta.s())));
    }
    if eta.n() != spec.n_series() || x.n() != spec.n_series() {
        return Err(Error::Dimension(format!(
            "panels have {} and {} series, moment layout {}",
            eta.n(),
            x.n(),
            spec.n_series()
        )));
    }
    if eta.t() != x.t() {
        return Err(Error::Dimension(format!(
            "observed T = {} differs from simulated T = {}",
            eta.t(),
            x.t()
        )));
    }
    if eta.t() < 2 {
        return Err(Error::Domain("need at least 2 time periods".into()));
    }
    if eta.data().iter().chain(x.data()).any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in bootstrap input".into()));
    }
    Ok(())
}

/// Rank indices of both panels, built once and reused by every replicate.
struct Ranked {
    t: usize,
    s: usize,
    eta: Vec<RankIndex>,
    x: Vec<RankIndex>,
}

impl Ranked {
    fn new(eta: &Panel, x: &Panel) -> Self {
        Self {
            t: eta.t(),
            s: x.s(),
            eta: crate::depmeas::rank_indices(eta),
            x: crate::depmeas::rank_indices(x),
        }
    }

    /// Doubled ranks of series `i` in the resample `idx`, observed then
    /// simulated (whole time slices of `S` cells).
    fn resampled(&self, i: usize, idx: &[usize], counts: &[u32], cell_counts: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let (t, s) = (self.t, self.s);
        let mut buf = vec![0u32; t];
        self.eta[i].weighted_doubled_ranks(counts, &mut buf);
        let e: Vec<u32> = idx.iter().map(|&k| buf[k]).collect();
        let mut buf = vec![0u32; t * s];
        self.x[i].weighted_doubled_ranks(cell_counts, &mut buf);
        let mut xr = Vec::with_capacity(t * s);
        for &k in idx {
            xr.extend_from_slice(&buf[k * s..(k + 1) * s]);
        }
        (e, xr)
    }
}

fn counts_of(idx: &[usize], t: usize, s: usize) -> (Vec<u32>, Vec<u32>) {
    let mut counts = vec![0u32; t];
    for &k in idx {
        counts[k] += 1;
    }
    let cells = counts.iter().flat_map(|&c| std::iter::repeat_n(c, s)).collect();
    (counts, cells)
}

fn joint_gap(r: &Ranked, spec: &MomentSpec, idx: &[usize]) -> Vec<f64> {
    let (counts, cells) = counts_of(idx, r.t, r.s);
    let n = r.eta.len();
    let mut er = Vec::with_capacity(n);
    let mut xr = Vec::with_capacity(n);
    for i in 0..n {
        let (e, x) = r.resampled(i, idx, &counts, &cells);
        er.push(e);
        xr.push(x);
    }
    let a = spec.moments_of_ranks(&er, r.t);
    let b = spec.moments_of_ranks(&xr, r.t * r.s);
    a.iter().zip(&b).map(|(u, v)| u - v).collect()
}

fn per_pair_gap(r: &Ranked, spec: &MomentSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (t, s) = (r.t, r.s);
    let l = spec.per_block();
    let mut out = vec![0.0; spec.len()];
    let cuts_e = spec.cuts(t);
    let cuts_x = spec.cuts(t * s);
    let mut ve = vec![0.0; l];
    let mut vx = vec![0.0; l];
    for q in 0..spec.blocks().len() {
        let mut acc_e = spec.new_stats();
        let mut acc_x = spec.new_stats();
        for (a, b) in spec.block_pairs(q) {
            let idx: Vec<usize> = (0..t).map(|_| rng.random_range(0..t)).collect();
            let (counts, cells) = counts_of(&idx, t, s);
            let (ea, xa) = r.resampled(a, &idx, &counts, &cells);
            let (eb, xb) = r.resampled(b, &idx, &counts, &cells);
            spec.accumulate_pair(&ea, &eb, &spec.tail_bits(&ea, &cuts_e), &spec.tail_bits(&eb, &cuts_e), &mut acc_e);
            spec.accumulate_pair(&xa, &xb, &spec.tail_bits(&xa, &cuts_x), &spec.tail_bits(&xb, &cuts_x), &mut acc_x);
        }
        spec.finish(&acc_e, t, &mut ve);
        spec.finish(&acc_x, t * s, &mut vx);
        for k in 0..l {
            out[q * l + k] = ve[k] - vx[k];
        }
    }
    out
}

fn replicate_rng(seed: u64, b: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64);
    rng
}

/// `(T / B) sum_b (g_b - g)(g_b - g)'` over replicate gaps in index order.
fn outer_average(t: usize, base: &[f64], gaps: &[Vec<f64>]) -> DMatrix<f64> {
    let l = base.len();
    let mut sigma = DMatrix::zeros(l, l);
    for g in gaps {
        for i in 0..l {
            let di = g[i] - base[i];
            for j in 0..l {
                sigma[(i, j)] += di * (g[j] - base[j]);
            }
        }
    }
    sigma * (t as f64 / gaps.len() as f64)
}

fn base_gap(r: &Ranked, spec: &MomentSpec) -> Vec<f64> {
    let idx: Vec<usize> = (0..r.t).collect();
    joint_gap(r, spec, &idx)
}

/// Bootstrap covariance of the moment gap `psi_T - psi_TS`: time indices are
/// drawn with replacement, each drawn period carrying its observed residuals
/// and all `S` simulated cells; ranks are recomputed within every resample.
pub fn bootstrap_sigma(
    eta: &Panel,
    x: &Panel,
    spec: &MomentSpec,
    reps: usize,
    seed: u64,
    mode: BootstrapMode,
) -> Result<DMatrix<f64>> {
    check(eta, x, spec)?;
    if reps < 2 {
        return Err(Error::Domain(format!("need at least 2 bootstrap replicates, got {reps}")));
    }
    let r = Ranked::new(eta, x);
    let t = r.t;
    let gaps: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|b| {
            let mut rng = replicate_rng(seed, b);
            match mode {
                BootstrapMode::Joint => {
                    let idx: Vec<usize> = (0..t).map(|_| rng.random_range(0..t)).collect();
                    joint_gap(&r, spec, &idx)
                }
                BootstrapMode::PerPair => per_pair_gap(&r, spec, &mut rng),
            }
        })
        .collect();
    Ok(outer_average(t, &base_gap(&r, spec), &gaps))
}

/// Joint bootstrap covariance for given resampling index vectors (one per
/// replicate, each of length `T`).
pub fn bootstrap_sigma_with_indices(
    eta: &Panel,
    x: &Panel,
    spec: &MomentSpec,
    indices: &[Vec<usize>],
) -> Result<DMatrix<f64>> {
    check(eta, x, spec)?;
    let t = eta.t();
    if indices.is_empty() {
        return Err(Error::Domain("no bootstrap replicates".into()));
    }
    if let Some(b) = indices.iter().position(|v| v.len() != t || v.iter().any(|&k| k >= t)) {
        return Err(Error::Dimension(format!("replicate {b} is not a resample of 0..{t}")));
    }
    let r = Ranked::new(eta, x);
    let gaps: Vec<Vec<f64>> = indices.par_iter().map(|idx| joint_gap(&r, spec, idx)).collect();
    Ok(outer_average(t, &base_gap(&r, spec), &gaps))
}
