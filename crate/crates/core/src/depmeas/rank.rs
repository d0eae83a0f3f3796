//! Ranking with average ranks for ties, kept as integer "doubled ranks"
//! `2 * average_rank` so that rank sums stay exact.

/// Order-preserving map of an `f64` onto `u64` (`-0.0` and `0.0` coincide).
#[inline]
fn sort_key(x: f64) -> u64 {
    let bits = (x + 0.0).to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

const RADIX_BITS: u32 = 11;
const RADIX: usize = 1 << RADIX_BITS;
/// Digits sorted by radix passes: the top 33 key bits.
const SHIFTS: [u32; 3] = [31, 42, 53];

/// Indices of `values` in ascending order (stable). LSD radix sort on the top
/// 33 bits of the order-preserving integer keys, then a stable sort of each
/// run sharing those bits by the full key. Passes whose digit is constant
/// are skipped.
#[cfg(test)]
fn sorted_order(values: &[f64]) -> Vec<u32> {
    sorted_keys(values).into_iter().map(|k| k.1).collect()
}

/// `(key, index)` pairs in ascending key order (stable).
fn sorted_keys(values: &[f64]) -> Vec<(u64, u32)> {
    let n = values.len();
    assert!(n <= u32::MAX as usize);
    let mut keys: Vec<(u64, u32)> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (sort_key(*v), i as u32))
        .collect();
    if n < 256 {
        keys.sort_by_key(|k| k.0);
        return keys;
    }
    let mut counts = vec![[0u32; RADIX]; SHIFTS.len()];
    for k in &keys {
        for (c, &shift) in counts.iter_mut().zip(&SHIFTS) {
            c[((k.0 >> shift) as usize) & (RADIX - 1)] += 1;
        }
    }
    let mut buf = vec![(0u64, 0u32); n];
    for (c, &shift) in counts.iter_mut().zip(&SHIFTS) {
        if c.iter().any(|&x| x as usize == n) {
            continue;
        }
        let mut total = 0;
        for x in c.iter_mut() {
            let here = *x;
            *x = total;
            total += here;
        }
        for k in &keys {
            let d = ((k.0 >> shift) as usize) & (RADIX - 1);
            buf[c[d] as usize] = *k;
            c[d] += 1;
        }
        std::mem::swap(&mut keys, &mut buf);
    }
    let high = |k: u64| k >> SHIFTS[0];
    let mut a = 0;
    while a < n {
        let mut b = a + 1;
        while b < n && high(keys[b].0) == high(keys[a].0) {
            b += 1;
        }
        if b - a > 1 {
            keys[a..b].sort_by_key(|k| k.0);
        }
        a = b;
    }
    keys
}

/// Sorted order of a series together with its tie groups, reusable for
/// ranking any reweighting of the same observations.
#[derive(Debug, Clone)]
pub(crate) struct RankIndex {
    order: Vec<u32>,
    /// `group_end[k]` is one past the last position in `order` of the tie
    /// group containing position `k`.
    group_end: Vec<u32>,
}

impl RankIndex {
    pub(crate) fn new(values: &[f64]) -> Self {
        let keys = sorted_keys(values);
        let n = keys.len();
        let mut group_end = vec![0u32; n];
        let mut k = 0;
        while k < n {
            let v = keys[k].0;
            let mut e = k + 1;
            while e < n && keys[e].0 == v {
                e += 1;
            }
            for g in group_end.iter_mut().take(e).skip(k) {
                *g = e as u32;
            }
            k = e;
        }
        let order = keys.into_iter().map(|k| k.1).collect();
        Self { order, group_end }
    }

    /// Doubled average ranks of the original observations.
    pub(crate) fn doubled_ranks(&self) -> Vec<u32> {
        let n = self.order.len();
        let mut r2 = vec![0u32; n];
        let mut k = 0;
        while k < n {
            let e = self.group_end[k] as usize;
            // positions k..e hold ranks k+1..=e, average (k+1+e)/2
            let d = (k + 1 + e) as u32;
            for p in k..e {
                r2[self.order[p] as usize] = d;
            }
            k = e;
        }
        r2
    }

    /// Doubled average ranks within a resample where observation `i` occurs
    /// `weight[i]` times: `2 W_below + w_tie + 1`. Entries with zero weight
    /// are left as 0.
    pub(crate) fn weighted_doubled_ranks(&self, weight: &[u32], out: &mut [u32]) {
        let n = self.order.len();
        let mut below = 0u32;
        let mut k = 0;
        while k < n {
            let e = self.group_end[k] as usize;
            let w_tie: u32 = (k..e).map(|p| weight[self.order[p] as usize]).sum();
            let d = 2 * below + w_tie + 1;
            for p in k..e {
                out[self.order[p] as usize] = d;
            }
            below += w_tie;
            k = e;
        }
    }
}

/// Doubled average ranks of `values`.
pub(crate) fn doubled_ranks(values: &[f64]) -> Vec<u32> {
    RankIndex::new(values).doubled_ranks()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_preserve_order() {
        let v = [-f64::INFINITY, -3.5, -1e-300, -0.0, 0.0, 1e-300, 2.0, f64::INFINITY];
        for w in v.windows(2) {
            assert!(sort_key(w[0]) <= sort_key(w[1]));
        }
        assert_eq!(sort_key(-0.0), sort_key(0.0));
    }

    #[test]
    fn radix_matches_comparison_sort() {
        let mut state = 12345u64;
        let values: Vec<f64> = (0..5000)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 1e3
            })
            .collect();
        let order = sorted_order(&values);
        let mut idx: Vec<u32> = (0..values.len() as u32).collect();
        idx.sort_by(|a, b| values[*a as usize].total_cmp(&values[*b as usize]));
        assert_eq!(order, idx);
    }

    #[test]
    fn radix_handles_near_duplicates_and_ties() {
        let mut state = 99u64;
        let values: Vec<f64> = (0..3000)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                1.0 + ((state >> 40) % 500) as f64 * 1e-13
            })
            .collect();
        let order = sorted_order(&values);
        let mut idx: Vec<u32> = (0..values.len() as u32).collect();
        idx.sort_by(|a, b| values[*a as usize].total_cmp(&values[*b as usize]));
        assert_eq!(order, idx);
    }

    #[test]
    fn ties_get_average_ranks() {
        let r2 = doubled_ranks(&[3.0, 1.0, 3.0, 2.0, 3.0]);
        // ranks: 1.0 -> 1, 2.0 -> 2, 3.0 x3 -> 4
        assert_eq!(r2, [8, 2, 8, 4, 8]);
    }

    #[test]
    fn weighted_ranks() {
        let idx = RankIndex::new(&[0.5, 0.1, 0.9]);
        let mut out = [0u32; 3];
        // resample {0.1, 0.1, 0.9}: ranks 1.5, 1.5, 3
        idx.weighted_doubled_ranks(&[0, 2, 1], &mut out);
        assert_eq!(out[1], 3);
        assert_eq!(out[2], 6);
    }
}
