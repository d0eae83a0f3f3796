//! Derivative-free simplex search over a box, with the box removed by the
//! transform `x = lo + (hi - lo) (sin z + 1) / 2`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadOptions {
    /// Stop when the largest vertex distance to the best vertex (sup norm,
    /// natural scale) falls below this.
    pub x_tol: f64,
    /// Stop when the spread of function values falls below this.
    pub f_tol: f64,
    /// Evaluation cap per free parameter.
    pub max_evals_per_param: usize,
    /// Initial simplex edge in the unconstrained coordinates.
    pub initial_step: f64,
    /// Fresh simplices started from the converged point.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-6,
            f_tol: 1e-10,
            max_evals_per_param: 2000,
            initial_step: 0.1,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_evals: usize,
    /// A tolerance was met before the evaluation cap.
    pub converged: bool,
    pub restarts: usize,
}

fn to_box(z: &[f64], bounds: &[(f64, f64)], x: &mut [f64]) {
    for ((xi, zi), (lo, hi)) in x.iter_mut().zip(z).zip(bounds) {
        *xi = (lo + (hi - lo) * (zi.sin() + 1.0) / 2.0).clamp(*lo, *hi);
    }
}

fn from_box(x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(bounds)
        .map(|(xi, (lo, hi))| (2.0 * (xi - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0).asin())
        .collect()
}

struct Counted<'a, F> {
    f: &'a mut F,
    bounds: &'a [(f64, f64)],
    buf: Vec<f64>,
    evals: usize,
    best: (Vec<f64>, f64),
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, z: &[f64]) -> f64 {
        to_box(z, self.bounds, &mut self.buf);
        let x = std::mem::take(&mut self.buf);
        let v = self.eval_natural(&x);
        self.buf = x;
        v
    }

    fn eval_natural(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best.1 {
            self.best = (x.to_vec(), v);
        }
        v
    }
}

/// Minimizes `f` over the box `bounds` starting from `x0` (projected into
/// the box). Always returns the best point seen; `f(x) <= f(x0)`.
pub fn nelder_mead_bounded<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: &NelderMeadOptions,
) -> NelderMeadOutcome {
    let p = x0.len();
    assert_eq!(p, bounds.len(), "one bound per coordinate");
    let start: Vec<f64> = x0.iter().zip(bounds).map(|(x, (lo, hi))| x.clamp(*lo, *hi)).collect();
    let mut counted = Counted {
        f: &mut f,
        bounds,
        buf: vec![0.0; p],
        evals: 0,
        best: (start.clone(), f64::INFINITY),
    };
    let max_evals = opts.max_evals_per_param * p.max(1);
    let mut z = from_box(&start, bounds);
    let mut fz = counted.eval_natural(&start);
    let mut converged = false;
    let mut restarts = 0;
    for round in 0..=opts.restarts {
        if round > 0 {
            restarts += 1;
        }
        let (zb, fb, conv) = simplex_search(&mut counted, &z, fz, bounds, opts, max_evals);
        converged = conv;
        if fb <= fz {
            z = zb;
            fz = fb;
        }
        if counted.evals >= max_evals {
            break;
        }
    }
    let (x, f_best) = counted.best.clone();
    NelderMeadOutcome {
        x,
        f: f_best,
        n_evals: counted.evals,
        converged,
        restarts,
    }
}

fn simplex_search<F: FnMut(&[f64]) -> f64>(
    c: &mut Counted<'_, F>,
    z0: &[f64],
    f0: f64,
    bounds: &[(f64, f64)],
    opts: &NelderMeadOptions,
    max_evals: usize,
) -> (Vec<f64>, f64, bool) {
    let p = z0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(z0.to_vec(), f0)];
    for k in 0..p {
        let mut v = z0.to_vec();
        v[k] += opts.initial_step;
        let fv = c.eval(&v);
        simplex.push((v, fv));
    }
    let mut xa = vec![0.0; p];
    let mut xb = vec![0.0; p];
    loop {
        // stable order keeps ties deterministic
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[p].1;
        to_box(&simplex[0].0, bounds, &mut xa);
        let mut diameter = 0.0_f64;
        for v in &simplex[1..] {
            to_box(&v.0, bounds, &mut xb);
            for (a, b) in xa.iter().zip(&xb) {
                diameter = diameter.max((a - b).abs());
            }
        }
        if diameter < opts.x_tol || (worst - best).abs() < opts.f_tol {
            return (simplex[0].0.clone(), best, true);
        }
        if c.evals >= max_evals {
            return (simplex[0].0.clone(), best, false);
        }
        let mut centroid = vec![0.0; p];
        for v in &simplex[..p] {
            for (m, x) in centroid.iter_mut().zip(&v.0) {
                *m += x / p as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[p].0)
                .map(|(m, w)| m + t * (m - w))
                .collect()
        };
        let zr = along(1.0);
        let fr = c.eval(&zr);
        if fr < best {
            let ze = along(2.0);
            let fe = c.eval(&ze);
            simplex[p] = if fe < fr { (ze, fe) } else { (zr, fr) };
            continue;
        }
        if fr < simplex[p - 1].1 {
            simplex[p] = (zr, fr);
            continue;
        }
        let (zc, fc) = if fr < worst {
            let zc = along(0.5);
            let fc = c.eval(&zc);
            (zc, fc)
        } else {
            let zc = along(-0.5);
            let fc = c.eval(&zc);
            (zc, fc)
        };
        if fc < fr.min(worst) {
            simplex[p] = (zc, fc);
            continue;
        }
        // shrink towards the best vertex
        let z_best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            for (x, b) in v.0.iter_mut().zip(&z_best) {
                *x = b + 0.5 * (*x - b);
            }
            v.1 = c.eval(&v.0);
        }
    }
}
