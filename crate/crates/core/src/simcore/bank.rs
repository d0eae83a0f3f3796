use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dimensions of a draw bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BankDims {
    pub n: usize,
    pub t: usize,
    pub s: usize,
    pub p_alpha: usize,
    /// Simulable `Z` components drawn per `(t, s)` cell; zero when `Z` is
    /// estimated from data.
    pub p_z: usize,
}

impl BankDims {
    pub fn new(n: usize, t: usize, s: usize, p_alpha: usize) -> Self {
        Self {
            n,
            t,
            s,
            p_alpha,
            p_z: 0,
        }
    }

    pub fn with_simulable_z(mut self, p_z: usize) -> Self {
        self.p_z = p_z;
        self
    }

    /// Number of `(t, s)` cells.
    pub fn cells(&self) -> usize {
        self.t * self.s
    }
}

/// Stream identifiers, one independent ChaCha stream per array.
const STREAM_EPS: u64 = 0;
const STREAM_FACTOR: u64 = 1;
const STREAM_Z: u64 = 2;

/// Fixed uniforms for the idiosyncratic errors, the latent factors and,
/// optionally, simulable observable factors. Drawn once and reused for every
/// parameter value.
///
/// Layouts: `eps_u[i T S + t S + s]`, `factor_u[(t S + s) p_alpha + j]`,
/// `z_u[(t S + s) p_z + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawBank {
    dims: BankDims,
    seed: u64,
    eps_u: Vec<f64>,
    factor_u: Vec<f64>,
    z_u: Vec<f64>,
}

/// Uniform on the open interval from the top 52 bits: `(k + 1/2) / 2^52`,
/// exactly representable and never 0 or 1.
#[inline]
pub(crate) fn open_uniform(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

fn fill(seed: u64, stream: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len).map(|_| open_uniform(rng.next_u64())).collect()
}

pub fn make_draw_bank(dims: BankDims, seed: u64) -> Result<DrawBank> {
    if dims.n == 0 || dims.t == 0 || dims.s == 0 || dims.p_alpha == 0 {
        return Err(Error::Domain(format!(
            "draw bank dimensions must be positive, got n={} T={} S={} p_alpha={}",
            dims.n, dims.t, dims.s, dims.p_alpha
        )));
    }
    let cells = dims.cells();
    Ok(DrawBank {
        dims,
        seed,
        eps_u: fill(seed, STREAM_EPS, dims.n * cells),
        factor_u: fill(seed, STREAM_FACTOR, cells * dims.p_alpha),
        z_u: fill(seed, STREAM_Z, cells * dims.p_z),
    })
}

impl DrawBank {
    pub fn dims(&self) -> BankDims {
        self.dims
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn eps_u(&self) -> &[f64] {
        &self.eps_u
    }

    pub fn factor_u(&self) -> &[f64] {
        &self.factor_u
    }

    pub fn z_u(&self) -> &[f64] {
        &self.z_u
    }

    /// Uniforms of series `i`, ordered by `(t, s)`.
    pub fn eps_series(&self, i: usize) -> &[f64] {
        let c = self.dims.cells();
        &self.eps_u[i * c..(i + 1) * c]
    }

    /// A copy with the `s` index permuted within every `t` (`perm[s]` is
    /// the source slot of new slot `s`).
    pub fn permute_s(&self, perm: &[usize]) -> Result<DrawBank> {
        let BankDims { n, t, s, p_alpha, p_z } = self.dims;
        if perm.len() != s {
            return Err(Error::Dimension(format!("permutation of length {} for S = {s}", perm.len())));
        }
        let mut out = self.clone();
        for tt in 0..t {
            for (new, &old) in perm.iter().enumerate() {
                for i in 0..n {
                    out.eps_u[i * t * s + tt * s + new] = self.eps_u[i * t * s + tt * s + old];
                }
                for j in 0..p_alpha {
                    out.factor_u[(tt * s + new) * p_alpha + j] = self.factor_u[(tt * s + old) * p_alpha + j];
                }
                for j in 0..p_z {
                    out.z_u[(tt * s + new) * p_z + j] = self.z_u[(tt * s + old) * p_z + j];
                }
            }
        }
        Ok(out)
    }
}
