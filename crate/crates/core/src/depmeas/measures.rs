use super::rank::doubled_ranks;
use crate::error::{Error, Result};

fn check_pair(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "pseudo-observation lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::Domain(format!("need at least 2 observations, got {}", u.len())));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("quantile level {tau} must lie in (0, 1)")))
    }
}

/// `rank / (N + 1)` with average ranks for ties.
pub fn pseudo_obs(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::Domain(format!("need at least 2 observations, got {}", values.len())));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN in series to be ranked".into()));
    }
    let denom = 2.0 * (values.len() + 1) as f64;
    Ok(doubled_ranks(values).into_iter().map(|r| r as f64 / denom).collect())
}

/// `12/N sum u v - 3`.
pub fn spearman_stat(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    let s: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok(12.0 / u.len() as f64 * s - 3.0)
}

/// Empirical quantile dependence: the lower-tail joint share scaled by
/// `1/tau` for `tau <= 1/2`, otherwise the upper-tail share scaled by
/// `1/(1 - tau)`.
pub fn qdep_stat(u: &[f64], v: &[f64], tau: f64) -> Result<f64> {
    check_pair(u, v)?;
    check_tau(tau)?;
    let n = u.len() as f64;
    Ok(if tau <= 0.5 {
        let c = u.iter().zip(v).filter(|(a, b)| **a <= tau && **b <= tau).count();
        c as f64 / (n * tau)
    } else {
        let c = u.iter().zip(v).filter(|(a, b)| **a > tau && **b > tau).count();
        c as f64 / (n * (1.0 - tau))
    })
}

/// Kendall's tau-a: `(concordant - discordant) / (N (N-1) / 2)`, tied
/// pairs counting as neither.
pub fn kendall_stat(u: &[f64], v: &[f64]) -> Result<f64> {
    check_pair(u, v)?;
    if u.iter().chain(v).any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in pseudo-observations".into()));
    }
    let ru = doubled_ranks(u);
    let rv = doubled_ranks(v);
    Ok(kendall_from_ranks(&ru, &rv))
}

/// Concordant minus discordant pair count by Knight's O(N log N) method.
pub(crate) fn kendall_score(x: &[u32], y: &[u32]) -> i64 {
    let n = x.len();
    let mut pairs: Vec<(u32, u32)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_unstable();
    let total = (n as i64) * (n as i64 - 1) / 2;
    // pairs tied in x, and tied in both
    let (mut tied_x, mut tied_xy) = (0i64, 0i64);
    let mut k = 0;
    while k < n {
        let mut e = k + 1;
        while e < n && pairs[e].0 == pairs[k].0 {
            e += 1;
        }
        let m = (e - k) as i64;
        tied_x += m * (m - 1) / 2;
        let mut a = k;
        while a < e {
            let mut b = a + 1;
            while b < e && pairs[b].1 == pairs[a].1 {
                b += 1;
            }
            let m = (b - a) as i64;
            tied_xy += m * (m - 1) / 2;
            a = b;
        }
        k = e;
    }
    // inversions of y in x-order (x ties already ordered by y)
    let mut ys: Vec<u32> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0u32; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let mut tied_y = 0i64;
    let mut k = 0;
    while k < n {
        let mut e = k + 1;
        while e < n && ys[e] == ys[k] {
            e += 1;
        }
        let m = (e - k) as i64;
        tied_y += m * (m - 1) / 2;
        k = e;
    }
    total - tied_x - tied_y + tied_xy - 2 * swaps
}

pub(crate) fn kendall_from_ranks(x: &[u32], y: &[u32]) -> f64 {
    let n = x.len() as f64;
    kendall_score(x, y) as f64 / (n * (n - 1.0) / 2.0)
}

/// Sorts `a` ascending, returning the number of strict inversions.
fn merge_count(a: &mut [u32], buf: &mut [u32]) -> i64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = a.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if a[j] < a[i] {
            buf[k] = a[j];
            swaps += (mid - i) as i64;
            j += 1;
        } else {
            buf[k] = a[i];
            i += 1;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = a[i];
        i += 1;
        k += 1;
    }
    while j < n {
        buf[k] = a[j];
        j += 1;
        k += 1;
    }
    a.copy_from_slice(&buf[..n]);
    swaps
}
