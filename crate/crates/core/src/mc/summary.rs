use std::fmt::Write as _;
use std::time::Duration;

use super::design::McDesign;
use super::run::{McRun, Replication};
use crate::dists::normal_quantile;
use crate::error::{Error, Result};

/// Summary rows of a Monte Carlo run, per free parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub design: McDesign,
    pub labels: Vec<String>,
    pub truth: Vec<f64>,
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    /// Variance across replications (divisor = number of replications).
    pub var: Vec<f64>,
    pub rmse: Vec<f64>,
    /// Rejection rate (%) of the two-sided t test of the true value.
    pub t_reject: Vec<f64>,
    /// Rejection rate (%) of the J test.
    pub j_reject: f64,
    pub completed: usize,
    pub failures: Vec<(usize, String)>,
    pub not_converged: usize,
    /// Not part of any written output.
    pub wall_time: Duration,
    pub replications: Vec<Replication>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub(crate) fn summarize(design: &McDesign, run: &McRun) -> Result<McSummary> {
    let reps = &run.replications;
    if reps.is_empty() {
        return Err(Error::Numerical("no replication completed".into()));
    }
    let truth = design.theta0();
    let p = truth.len();
    let r = reps.len() as f64;
    let crit = normal_quantile(1.0 - design.level / 2.0)?;
    let mut out = McSummary {
        design: design.clone(),
        labels: design.spec()?.free_labels(),
        truth: truth.clone(),
        mean: Vec::with_capacity(p),
        median: Vec::with_capacity(p),
        var: Vec::with_capacity(p),
        rmse: Vec::with_capacity(p),
        t_reject: Vec::with_capacity(p),
        j_reject: 100.0 * reps.iter().filter(|x| x.j_p_value < design.level).count() as f64 / r,
        completed: reps.len(),
        failures: run.failures.clone(),
        not_converged: reps.iter().filter(|x| !x.converged).count(),
        wall_time: run.wall_time,
        replications: reps.clone(),
    };
    for k in 0..p {
        let mut v: Vec<f64> = reps.iter().map(|x| x.theta_hat[k]).collect();
        let mean = v.iter().sum::<f64>() / r;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / r;
        let mse = v.iter().map(|x| (x - truth[k]).powi(2)).sum::<f64>() / r;
        let t: Vec<f64> = reps.iter().map(|x| x.t_stats[k]).filter(|t| t.is_finite()).collect();
        let rej = if t.is_empty() {
            f64::NAN
        } else {
            100.0 * t.iter().filter(|t| t.abs() > crit).count() as f64 / t.len() as f64
        };
        out.mean.push(mean);
        out.median.push(median(&mut v));
        out.var.push(var);
        out.rmse.push(mse.sqrt());
        out.t_reject.push(rej);
    }
    Ok(out)
}

impl McSummary {
    /// `# key = value` lines describing the run.
    pub fn settings_header(&self) -> String {
        let d = &self.design;
        let mut s = String::new();
        let _ = writeln!(s, "# design = {}", d.id.name());
        let _ = writeln!(s, "# z_mode = {:?}", d.z_mode);
        let _ = writeln!(s, "# n = {}, T = {}, S = {}, reps = {}, seed = {}", d.n, d.t, d.s, d.reps, d.seed);
        let _ = writeln!(
            s,
            "# B = {}, pi_T = {}, n_draws = {}, level = {}, burn_in = {}, n_starts = {}, n_candidates = {}",
            d.bootstrap_reps, d.pi_t, d.n_draws, d.level, d.burn_in, d.n_starts, d.n_candidates
        );
        if let Ok(ms) = d.moment_spec() {
            let _ = writeln!(s, "# moments = {}", ms.labels().join(" "));
        }
        if let Ok(spec) = d.spec() {
            let b: Vec<String> = spec.free_bounds().iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
            let _ = writeln!(s, "# bounds = {}", b.join(" "));
        }
        let truth: Vec<String> = self.truth.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "# truth = {}", truth.join(" "));
        let _ = writeln!(
            s,
            "# completed = {}, failed = {}, not_converged = {}",
            self.completed,
            self.failures.len(),
            self.not_converged
        );
        s
    }

    /// One row per parameter: `parameter,mean,median,var,rmse,t,J`.
    pub fn to_csv(&self) -> String {
        let mut s = self.settings_header();
        s.push_str("parameter,mean,median,var,rmse,t,J\n");
        for k in 0..self.labels.len() {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.labels[k], self.mean[k], self.median[k], self.var[k], self.rmse[k], self.t_reject[k], self.j_reject
            );
        }
        s
    }

    /// Estimates, t statistics and J of every completed replication.
    pub fn replications_csv(&self) -> String {
        let mut s = self.settings_header();
        let mut head = vec!["replication".to_string()];
        head.extend(self.labels.iter().cloned());
        head.extend(self.labels.iter().map(|l| format!("t.{l}")));
        head.extend(["J".to_string(), "J.p_value".to_string(), "converged".to_string()]);
        s.push_str(&head.join(","));
        s.push('\n');
        for r in &self.replications {
            let mut row = vec![r.index.to_string()];
            row.extend(r.theta_hat.iter().chain(&r.t_stats).map(|v| format!("{v:.16e}")));
            row.push(format!("{:.16e}", r.j_stat));
            row.push(format!("{:.16e}", r.j_p_value));
            row.push(r.converged.to_string());
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Aligned table with rows mean / median / var / rmse / t / J.
    pub fn to_table(&self) -> String {
        let w = self.labels.iter().map(|l| l.len()).max().unwrap_or(0).max(9) + 2;
        let mut s = String::new();
        let _ = write!(s, "{:<8}", "");
        for l in &self.labels {
            let _ = write!(s, "{l:>w$}");
        }
        s.push('\n');
        let _ = write!(s, "{:<8}", "true");
        for v in &self.truth {
            let _ = write!(s, "{v:>w$.3}");
        }
        s.push('\n');
        let rows: [(&str, &Vec<f64>, usize); 5] = [
            ("mean", &self.mean, 3),
            ("median", &self.median, 3),
            ("var", &self.var, 3),
            ("rmse", &self.rmse, 3),
            ("t", &self.t_reject, 2),
        ];
        for (name, vals, prec) in rows {
            let _ = write!(s, "{name:<8}");
            for v in vals {
                let _ = write!(s, "{v:>w$.prec$}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{:<8}{:>w$.2}", "J", self.j_reject);
        s
    }
}
