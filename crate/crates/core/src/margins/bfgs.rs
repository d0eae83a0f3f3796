//! Quasi-Newton minimisation with central-difference gradients.

pub(crate) struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct BfgsOptions {
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-8,
            max_iter: 500,
        }
    }
}

fn gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], g: &mut [f64]) {
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let h = 1e-6 * x[k].abs().max(1.0);
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
}

const PLATEAU: usize = 5;
const PLATEAU_FTOL: f64 = 1e-12;

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Minimises `f`; non-finite values are treated as infeasible during the
/// line search.
pub(crate) fn minimize(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = vec![0.0; n];
    gradient(&f, &x, &mut g);
    // inverse Hessian approximation, row-major
    let mut h = vec![0.0; n * n];
    for k in 0..n {
        h[k * n + k] = 1.0;
    }
    let mut first = true;
    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut history: Vec<f64> = Vec::with_capacity(opts.max_iter);
    for iter in 0..opts.max_iter {
        if norm_inf(&g) < opts.gtol {
            return BfgsOutcome {
                x,
                f: fx,
                iterations: iter,
                converged: true,
            };
        }
        for i in 0..n {
            d[i] = -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // lost descent; restart from steepest descent
            for k in 0..n * n {
                h[k] = 0.0;
            }
            for k in 0..n {
                h[k * n + k] = 1.0;
                d[k] = -g[k];
            }
            slope = -g.iter().map(|v| v * v).sum::<f64>();
            first = true;
        }
        let mut step = 1.0;
        let mut accepted = false;
        let mut f_new = fx;
        for _ in 0..60 {
            for k in 0..n {
                x_new[k] = x[k] + step * d[k];
            }
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no further decrease resolvable at this gradient accuracy
            let converged = norm_inf(&g) < 1e-4;
            return BfgsOutcome {
                x,
                f: fx,
                iterations: iter,
                converged,
            };
        }
        gradient(&f, &x_new, &mut g_new);
        let s: Vec<f64> = (0..n).map(|k| x_new[k] - x[k]).collect();
        let y: Vec<f64> = (0..n).map(|k| g_new[k] - g[k]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            if first {
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let scale = sy / yy;
                for k in 0..n * n {
                    h[k] = 0.0;
                }
                for k in 0..n {
                    h[k * n + k] = scale;
                }
                first = false;
            }
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let small_change = (fx - f_new).abs() <= 1e-15 * fx.abs().max(1.0);
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;
        history.push(fx);
        // plateau: a parameter drifting towards an open boundary of the
        // unconstrained coordinates never meets the gradient test
        let plateau = history.len() > PLATEAU
            && history[history.len() - 1 - PLATEAU] - fx <= PLATEAU_FTOL * fx.abs().max(1.0);
        if (small_change && norm_inf(&g) < 1e-5) || plateau {
            return BfgsOutcome {
                x,
                f: fx,
                iterations: iter + 1,
                converged: true,
            };
        }
    }
    let converged = norm_inf(&g) < opts.gtol;
    BfgsOutcome {
        x,
        f: fx,
        iterations: opts.max_iter,
        converged,
    }
}
