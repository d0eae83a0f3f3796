use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::design::McDesign;
use super::dgp::Dgp;
use super::summary::{summarize, McSummary};
use crate::error::{Error, Result};
use crate::infer::{infer, InferenceOptions};
use crate::margins::{estimable_factor, fit_margin_with, FitOptions, MarginShape};
use crate::seeds::{derive_seed, purpose};
use crate::simcore::{make_draw_bank, BankDims, Panel};
use crate::smm::{smm_estimate, SmmOptions, SmmProblem};

/// Outcome of one successful replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub index: usize,
    pub theta_hat: Vec<f64>,
    /// Against the true parameters.
    pub t_stats: Vec<f64>,
    pub j_stat: f64,
    pub j_p_value: f64,
    pub converged: bool,
    pub n_evals: usize,
}

/// Seed of replication `rep`.
pub fn replication_seed(master: u64, rep: usize) -> u64 {
    derive_seed(master, &[rep as u64])
}

/// Filtered residuals and recovered factor of one simulated data set.
fn filter_data(design: &McDesign, dgp: &Dgp, seed: u64) -> Result<(Panel, Option<Vec<f64>>)> {
    let data = dgp.simulate(seed)?;
    let opts = FitOptions {
        std_errors: false,
        ..FitOptions::default()
    };
    let mut eta = Vec::with_capacity(design.n);
    for y in &data.y {
        let (model, _) = fit_margin_with(y, None, MarginShape::ar1_garch(), &opts)?;
        eta.push(model.filter_residuals(y, None)?);
    }
    let z_hat = match (design.factor_source(), &data.w) {
        (Some(source), Some(w)) => Some(estimable_factor(w, None, source)?.z_hat),
        _ => None,
    };
    Ok((Panel::from_series(&eta)?, z_hat))
}

/// Simulate, filter, estimate and test once.
pub fn run_replication(design: &McDesign, dgp: &Dgp, index: usize) -> Result<Replication> {
    let seed = replication_seed(design.seed, index);
    let (observed, z_hat) = filter_data(design, dgp, seed)?;
    let spec = design.spec()?;
    let mut dims = BankDims::new(design.n, design.t, design.s, spec.p_alpha());
    if spec.p_z_simulable() > 0 {
        dims = dims.with_simulable_z(spec.p_z_simulable());
    }
    let bank = make_draw_bank(dims, derive_seed(seed, &[purpose::BANK]))?;
    let problem = SmmProblem::new(spec, design.moment_spec()?, observed, z_hat, bank, None)?;
    let smm = SmmOptions {
        n_starts: design.n_starts,
        n_candidates: design.n_candidates,
        seed,
        nelder_mead: design.nelder_mead,
        ..SmmOptions::default()
    };
    let result = smm_estimate(&problem, &smm)?;
    let inf = InferenceOptions {
        bootstrap_reps: design.bootstrap_reps,
        pi_t: design.pi_t,
        n_draws: design.n_draws,
        seed,
        ..InferenceOptions::default()
    };
    let theta0 = design.theta0();
    let report = infer(&problem, &result, &inf, Some(&theta0))?;
    Ok(Replication {
        index,
        theta_hat: result.theta_hat,
        t_stats: report.t_stats,
        j_stat: report.j.stat,
        j_p_value: report.j.p_value,
        converged: result.converged,
        n_evals: result.n_evals,
    })
}

/// Replications of a design, in index order, with failed ones separated.
#[derive(Debug, Clone)]
pub struct McRun {
    pub replications: Vec<Replication>,
    /// `(index, message)` of failed replications.
    pub failures: Vec<(usize, String)>,
    pub wall_time: Duration,
}

/// Runs every replication on the current rayon pool.
pub fn run_replications(design: &McDesign) -> Result<McRun> {
    let start = Instant::now();
    let dgp = Dgp::new(design)?;
    let outcomes: Vec<Result<Replication>> = (0..design.reps)
        .into_par_iter()
        .map(|r| run_replication(design, &dgp, r))
        .collect();
    let mut replications = Vec::new();
    let mut failures = Vec::new();
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(rep) => replications.push(rep),
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    Ok(McRun {
        replications,
        failures,
        wall_time: start.elapsed(),
    })
}

/// Full protocol: replications, then summary statistics. Fails when more
/// than 2% of the replications fail.
pub fn run_design(design: &McDesign) -> Result<McSummary> {
    let run = run_replications(design)?;
    if run.failures.len() * 50 > design.reps {
        let (r, msg) = &run.failures[0];
        return Err(Error::Numerical(format!(
            "{} of {} replications failed (first: replication {r}: {msg})",
            run.failures.len(),
            design.reps
        )));
    }
    summarize(design, &run)
}
