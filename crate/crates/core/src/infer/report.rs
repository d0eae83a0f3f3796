use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_sigma, BootstrapMode};
use super::jacobian::{numeric_jacobian, Difference};
use super::jtest::{j_test, JMode, JTest};
use super::sandwich::{omega, std_errors, t_stats};
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, purpose};
use crate::smm::{SmmProblem, SmmResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceOptions {
    pub bootstrap_reps: usize,
    /// Finite-difference step of the Jacobian.
    pub pi_t: f64,
    /// Draws for the simulated J p-value.
    pub n_draws: usize,
    pub seed: u64,
    pub bootstrap_mode: BootstrapMode,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            bootstrap_reps: 500,
            pi_t: 0.05,
            n_draws: 1000,
            seed: 0,
            bootstrap_mode: BootstrapMode::Joint,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceReport {
    pub jacobian: DMatrix<f64>,
    pub schemes: Vec<Difference>,
    pub sigma: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    /// Against the supplied null (zero by default).
    pub t_stats: Vec<f64>,
    pub j: JTest,
    pub bootstrap_reps: usize,
    pub pi_t: f64,
    pub n_draws: usize,
    pub warnings: Vec<String>,
}

/// Jacobian, bootstrap covariance, sandwich covariance, t statistics and
/// overidentification test at an estimate. After two-step estimation the
/// first-step covariance is reused and the J test uses the chi-square law.
pub fn infer(
    problem: &SmmProblem,
    result: &SmmResult,
    opts: &InferenceOptions,
    theta_null: Option<&[f64]>,
) -> Result<InferenceReport> {
    let theta = &result.theta_hat;
    let t = problem.t();
    let jac = numeric_jacobian(problem, theta, opts.pi_t)?;
    let mut warnings = result.warnings.clone();
    if jac.schemes.contains(&Difference::Degenerate) {
        warnings.push("a Jacobian column could not be differenced inside the box".to_string());
    }
    let (sigma, reps) = match &result.sigma {
        Some(s) => (s.clone(), result.bootstrap_reps),
        None => {
            let observed = problem
                .observed()
                .ok_or_else(|| Error::Spec("inference needs the observed panel".into()))?;
            let x_hat = problem.simulate(theta)?;
            let s = bootstrap_sigma(
                observed,
                &x_hat,
                problem.moment_spec(),
                opts.bootstrap_reps,
                derive_seed(opts.seed, &[purpose::BOOTSTRAP]),
                opts.bootstrap_mode,
            )?;
            (s, opts.bootstrap_reps)
        }
    };
    let w = &result.weight;
    let om = omega(&jac.matrix, w, &sigma)?;
    let se = std_errors(&om, t);
    let zeros = vec![0.0; theta.len()];
    let ts = t_stats(theta, theta_null.unwrap_or(&zeros), &om, t)?;
    let gap: Vec<f64> = problem
        .psi_t()
        .iter()
        .zip(&result.psi_sim_at_hat)
        .map(|(a, b)| a - b)
        .collect();
    let mode = if result.first_step.is_some() { JMode::Chi2 } else { JMode::Simulated };
    let j = j_test(
        &gap,
        w,
        &sigma,
        &jac.matrix,
        t,
        mode,
        opts.n_draws,
        derive_seed(opts.seed, &[purpose::J_DRAWS]),
    )?;
    warnings.extend(j.warnings.iter().cloned());
    Ok(InferenceReport {
        jacobian: jac.matrix,
        schemes: jac.schemes,
        sigma,
        omega: om,
        std_errors: se,
        t_stats: ts,
        j,
        bootstrap_reps: reps,
        pi_t: opts.pi_t,
        n_draws: opts.n_draws,
        warnings,
    })
}
