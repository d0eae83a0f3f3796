use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best point of a start design.
#[derive(Debug, Clone, PartialEq)]
pub struct StartChoice {
    pub x: Vec<f64>,
    pub f: f64,
    /// Position in the start design (0 is the box midpoint).
    pub index: usize,
}

fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().take_while(|p| *p * *p <= c).all(|p| !c.is_multiple_of(*p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// Start design over the box: the midpoint, then Halton points with a
/// random shift modulo one (seeded).
pub fn start_points(bounds: &[(f64, f64)], n_starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = bounds.len();
    let bases = primes(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let mut out = Vec::with_capacity(n_starts);
    for k in 0..n_starts {
        let point = bounds
            .iter()
            .enumerate()
            .map(|(j, (lo, hi))| {
                let v = if k == 0 {
                    0.5
                } else {
                    (radical_inverse(k as u64, bases[j]) + shift[j]).fract()
                };
                lo + (hi - lo) * v
            })
            .collect();
        out.push(point);
    }
    out
}

/// Evaluates `f` on the start design and returns every point, best first
/// (ties by index; NaN counts as +inf).
pub fn ranked_starts(
    mut f: impl FnMut(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    n_starts: usize,
    seed: u64,
) -> Vec<StartChoice> {
    let mut all: Vec<StartChoice> = start_points(bounds, n_starts.max(1), seed)
        .into_iter()
        .enumerate()
        .map(|(index, x)| {
            let v = f(&x);
            let f = if v.is_nan() { f64::INFINITY } else { v };
            StartChoice { x, f, index }
        })
        .collect();
    all.sort_by(|a, b| a.f.total_cmp(&b.f).then(a.index.cmp(&b.index)));
    all
}

/// Evaluates `f` on the start design and returns the minimizer, ties going
/// to the lowest index.
pub fn multi_start(
    f: impl FnMut(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    n_starts: usize,
    seed: u64,
) -> StartChoice {
    ranked_starts(f, bounds, n_starts, seed).swap_remove(0)
}
