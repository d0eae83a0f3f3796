use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::multistart::ranked_starts;
use super::nelder_mead::{nelder_mead_bounded, NelderMeadOptions};
use super::problem::SmmProblem;
use crate::error::{Error, Result};
use crate::infer::{bootstrap_sigma, regularized_inverse, BootstrapMode};
use crate::seeds::{derive_seed, purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmmOptions {
    /// Size of the start design; 1 evaluates only the box midpoint.
    pub n_starts: usize,
    /// Best start points refined by a coarse simplex search before the
    /// final search from the best of them.
    pub n_candidates: usize,
    /// Simplex settings of the coarse searches.
    pub screen: NelderMeadOptions,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
    /// Re-minimize with the inverse bootstrap covariance as weight.
    pub two_step: bool,
    /// Bootstrap replicates for the second-step weight.
    pub bootstrap_reps: usize,
    pub bootstrap_mode: BootstrapMode,
    /// Skip the start design and start here.
    pub start: Option<Vec<f64>>,
}

impl Default for SmmOptions {
    fn default() -> Self {
        Self {
            n_starts: 64,
            n_candidates: 8,
            screen: NelderMeadOptions {
                x_tol: 1e-2,
                f_tol: 1e-9,
                restarts: 0,
                ..NelderMeadOptions::default()
            },
            seed: 0,
            nelder_mead: NelderMeadOptions::default(),
            two_step: false,
            bootstrap_reps: 500,
            bootstrap_mode: BootstrapMode::Joint,
            start: None,
        }
    }
}

/// Estimate and first-step summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SmmResult {
    pub theta_hat: Vec<f64>,
    /// Objective at the estimate in the final weight metric.
    pub objective: f64,
    pub n_evals: usize,
    pub converged: bool,
    pub restarts: usize,
    pub psi_sim_at_hat: Vec<f64>,
    /// Weight matrix of the final step.
    pub weight: DMatrix<f64>,
    /// First-step estimate and objective when two-step weighting was used.
    pub first_step: Option<(Vec<f64>, f64)>,
    /// Bootstrap covariance at the first-step estimate (two-step only).
    pub sigma: Option<DMatrix<f64>>,
    /// Replicates behind `sigma` (0 without a second step).
    pub bootstrap_reps: usize,
    pub warnings: Vec<String>,
}

struct Step {
    theta: Vec<f64>,
    f: f64,
    n_evals: usize,
    converged: bool,
    restarts: usize,
}

fn minimize(problem: &SmmProblem, start: &[f64], opts: &NelderMeadOptions) -> Step {
    let out = nelder_mead_bounded(|x| problem.objective(x), start, problem.bounds(), opts);
    Step {
        theta: out.x,
        f: out.f,
        n_evals: out.n_evals,
        converged: out.converged,
        restarts: out.restarts,
    }
}

/// One- or two-step SMM estimate.
pub fn smm_estimate(problem: &SmmProblem, opts: &SmmOptions) -> Result<SmmResult> {
    let mut n_evals = 0;
    let start = match &opts.start {
        Some(s) => {
            if s.len() != problem.n_free() {
                return Err(Error::Dimension(format!(
                    "start has {} values for {} free parameters",
                    s.len(),
                    problem.n_free()
                )));
            }
            s.clone()
        }
        None => {
            let seed = derive_seed(opts.seed, &[purpose::STARTS]);
            let ranked = ranked_starts(|x| problem.objective(x), problem.bounds(), opts.n_starts, seed);
            n_evals += ranked.len();
            let k = opts.n_candidates.min(ranked.len());
            if k <= 1 {
                ranked[0].x.clone()
            } else {
                let mut best: Option<Step> = None;
                for c in &ranked[..k] {
                    let step = minimize(problem, &c.x, &opts.screen);
                    n_evals += step.n_evals;
                    if best.as_ref().is_none_or(|b| step.f < b.f) {
                        best = Some(step);
                    }
                }
                best.expect("at least one candidate").theta
            }
        }
    };
    let step1 = minimize(problem, &start, &opts.nelder_mead);
    n_evals += step1.n_evals;
    if problem.evaluate(&step1.theta).penalized {
        return Err(Error::Numerical(
            "no admissible parameter value found (objective penalized everywhere visited)".into(),
        ));
    }
    if !opts.two_step {
        return Ok(SmmResult {
            psi_sim_at_hat: problem.simulated_moments(&step1.theta)?,
            theta_hat: step1.theta,
            objective: step1.f,
            n_evals,
            converged: step1.converged,
            restarts: step1.restarts,
            weight: problem.weight().clone(),
            first_step: None,
            sigma: None,
            bootstrap_reps: 0,
            warnings: Vec::new(),
        });
    }

    let observed = problem
        .observed()
        .ok_or_else(|| Error::Spec("two-step weighting needs the observed panel".into()))?;
    let x_hat = problem.simulate(&step1.theta)?;
    let sigma = bootstrap_sigma(
        observed,
        &x_hat,
        problem.moment_spec(),
        opts.bootstrap_reps,
        derive_seed(opts.seed, &[purpose::BOOTSTRAP]),
        opts.bootstrap_mode,
    )?;
    let mut warnings = Vec::new();
    let (w2, ridged) = regularized_inverse(&sigma)?;
    if ridged {
        warnings.push("bootstrap covariance near singular; ridge added before inversion".to_string());
    }
    let second = problem.with_weight(w2)?;
    let step2 = minimize(&second, &step1.theta, &opts.nelder_mead);
    n_evals += step2.n_evals;
    Ok(SmmResult {
        psi_sim_at_hat: second.simulated_moments(&step2.theta)?,
        theta_hat: step2.theta,
        objective: step2.f,
        n_evals,
        converged: step2.converged,
        restarts: step2.restarts,
        weight: second.weight().clone(),
        first_step: Some((step1.theta, step1.f)),
        sigma: Some(sigma),
        bootstrap_reps: opts.bootstrap_reps,
        warnings,
    })
}
