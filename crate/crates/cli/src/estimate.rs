use std::fmt::Write as _;

use fcsmm::depmeas::{empirical_moments, simulated_moments, Measure, MomentSpec};
use fcsmm::infer::{infer, InferenceOptions, InferenceReport};
use fcsmm::seeds::{derive_seed, purpose};
use fcsmm::simcore::{make_draw_bank, BankDims, FactorCopulaSpec, Panel, ZMode};
use fcsmm::smm::{smm_estimate, SmmOptions, SmmProblem, SmmResult};
use nalgebra::DMatrix;

use crate::config::RunConfig;
use crate::csvio::{fmt_f64, read_table, write_matrix, write_text};
use crate::error::CliError;
use crate::filter::{load_returns, run_filter};
use crate::Ctx;

/// Quantile levels of the plot-ready dependence curve.
const CURVE_TAUS: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90,
    0.95,
];

/// Everything the estimation needs from the data files.
pub struct Inputs {
    pub columns: Vec<String>,
    pub eta: Vec<Vec<f64>>,
    pub z_hat: Option<Vec<f64>>,
}

/// Residuals either read from a `filter` run or computed from raw returns.
/// The identification check runs before any model is fitted.
pub fn load_inputs(cfg: &RunConfig) -> Result<(Inputs, FactorCopulaSpec, MomentSpec), CliError> {
    if let Some(path) = &cfg.data.residuals {
        let table = read_table(path)?;
        let columns = cfg.data.columns.clone().unwrap_or_else(|| table.names.clone());
        let (spec, ms) = identified(cfg, &columns)?;
        let eta = table.select(&columns, path)?;
        let z_hat = match &cfg.data.factor_residuals {
            Some(fp) => {
                let f = read_table(fp)?;
                let z = match f.column("z_hat") {
                    Some(z) => z.to_vec(),
                    None if f.names.len() == 1 => f.columns[0].clone(),
                    None => return Err(CliError::Config(format!("{}: no `z_hat` column", fp.display()))),
                };
                if z.len() != table.rows() {
                    return Err(CliError::Data(format!(
                        "{} has {} rows, {} has {}",
                        fp.display(),
                        z.len(),
                        path.display(),
                        table.rows()
                    )));
                }
                Some(z)
            }
            None => None,
        };
        return Ok((Inputs { columns, eta, z_hat }, spec, ms));
    }
    let raw = load_returns(cfg)?;
    let (spec, ms) = identified(cfg, &raw.columns)?;
    let (f, _) = run_filter(cfg, &raw)?;
    Ok((
        Inputs {
            columns: f.columns,
            eta: f.eta,
            z_hat: f.z_hat,
        },
        spec,
        ms,
    ))
}

fn identified(cfg: &RunConfig, columns: &[String]) -> Result<(FactorCopulaSpec, MomentSpec), CliError> {
    let spec = cfg.copula_spec(columns)?;
    let ms = cfg.moment_spec(columns)?;
    if ms.len() < spec.n_free() {
        return Err(CliError::Config(format!(
            "not identified: {} moments for {} free parameters",
            ms.len(),
            spec.n_free()
        )));
    }
    Ok((spec, ms))
}

pub fn settings_header(cfg: &RunConfig, ctx: &Ctx, spec: &FactorCopulaSpec, ms: &MomentSpec) -> String {
    let e = &cfg.estimation;
    let mut s = String::new();
    let _ = writeln!(s, "# seed = {}", ctx.seed);
    let _ = writeln!(
        s,
        "# S = {}, B = {}, pi_T = {}, n_draws = {}, bootstrap = {:?}, two_step = {}",
        e.s, e.bootstrap_reps, e.pi_t, e.n_draws, e.bootstrap_mode, e.two_step
    );
    let nm = &e.nelder_mead;
    let _ = writeln!(
        s,
        "# n_starts = {}, n_candidates = {}, nelder_mead = (x_tol {}, f_tol {}, max_evals_per_param {}, step {}, restarts {})",
        e.n_starts, e.n_candidates, nm.x_tol, nm.f_tol, nm.max_evals_per_param, nm.initial_step, nm.restarts
    );
    let menu: Vec<String> = ms.measures().iter().map(Measure::label).collect();
    let _ = writeln!(s, "# moments = {} per group, {} groups", menu.join(" "), ms.blocks().len());
    let _ = writeln!(
        s,
        "# factors = {:?}, eps = {:?}, z_mode = {:?}, p_alpha = {}, p_beta = {}",
        spec.factor_families(),
        spec.eps_family(),
        spec.z_mode(),
        spec.p_alpha(),
        spec.p_beta()
    );
    for (k, v) in &cfg.copula.fixed {
        let _ = writeln!(s, "# fixed {k} = {v}");
    }
    for (k, v) in &cfg.copula.ties {
        let _ = writeln!(s, "# tie {k} = {v}");
    }
    let bounds: Vec<String> = spec
        .free_labels()
        .iter()
        .zip(spec.free_bounds())
        .map(|(l, (lo, hi))| format!("{l} [{lo}, {hi}]"))
        .collect();
    let _ = writeln!(s, "# bounds = {}", bounds.join("; "));
    s
}

pub struct Estimation {
    pub problem: SmmProblem,
    pub result: SmmResult,
    pub report: InferenceReport,
}

pub fn estimate(cfg: &RunConfig, ctx: &Ctx, inputs: Inputs, spec: FactorCopulaSpec, ms: MomentSpec) -> Result<Estimation, CliError> {
    let needs_z = spec.p_beta() > 0 && spec.z_mode() == ZMode::Estimable;
    let z_hat = match (needs_z, inputs.z_hat) {
        (true, None) => {
            return Err(CliError::Config(
                "the copula has an estimable factor but neither [factor] nor data.factor_residuals is set".into(),
            ))
        }
        (true, z) => z,
        (false, _) => None,
    };
    let e = &cfg.estimation;
    let observed = Panel::from_series(&inputs.eta)?;
    let mut dims = BankDims::new(observed.n(), observed.t(), e.s, spec.p_alpha());
    if spec.p_z_simulable() > 0 {
        dims = dims.with_simulable_z(spec.p_z_simulable());
    }
    let bank = make_draw_bank(dims, derive_seed(ctx.seed, &[purpose::BANK]))?;
    let problem = SmmProblem::new(spec, ms, observed, z_hat, bank, None)?;
    let opts = SmmOptions {
        n_starts: e.n_starts,
        n_candidates: e.n_candidates,
        seed: ctx.seed,
        nelder_mead: e.nelder_mead,
        two_step: e.two_step,
        bootstrap_reps: e.bootstrap_reps,
        bootstrap_mode: e.bootstrap_mode,
        ..SmmOptions::default()
    };
    let result = smm_estimate(&problem, &opts)?;
    let inf = InferenceOptions {
        bootstrap_reps: e.bootstrap_reps,
        pi_t: e.pi_t,
        n_draws: e.n_draws,
        seed: ctx.seed,
        bootstrap_mode: e.bootstrap_mode,
    };
    let report = infer(&problem, &result, &inf, None)?;
    Ok(Estimation { problem, result, report })
}

/// Table with `estimate / t-statistic` columns and the J test below.
pub fn summary_table(labels: &[String], est: &Estimation) -> String {
    let (r, rep) = (&est.result, &est.report);
    let mut s = format!("{:<16}{:>12}{:>14}\n", "parameter", "estimate", "t-statistic");
    for (k, l) in labels.iter().enumerate() {
        let _ = writeln!(s, "{l:<16}{:>12.4}{:>14.3}", r.theta_hat[k], rep.t_stats[k]);
    }
    let _ = writeln!(s, "{:<16}{:>12.4}{:>14}", "J", rep.j.stat, "");
    let _ = writeln!(s, "{:<16}{:>12.4}{:>14}", "p-value", rep.j.p_value, "");
    let _ = writeln!(s, "J mode {:?}, df {}, objective {:e}, converged {}", rep.j.mode, rep.j.df, r.objective, r.converged);
    for w in &rep.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn cmd_estimate(cfg: &RunConfig, ctx: &Ctx) -> Result<(), CliError> {
    let (inputs, spec, ms) = load_inputs(cfg)?;
    let head = settings_header(cfg, ctx, &spec, &ms);
    let curve_spec = MomentSpec::with_order(&CURVE_TAUS.map(Measure::Qdep), spec.group_of())?;
    let est = estimate(cfg, ctx, inputs, spec, ms)?;
    let (p, r, rep) = (&est.problem, &est.result, &est.report);
    let labels = p.spec().free_labels();
    let moments = p.moment_spec().labels();

    let mut csv = head.clone();
    csv.push_str("parameter,estimate,std_error,t_stat\n");
    for (k, l) in labels.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{l},{},{},{}",
            fmt_f64(r.theta_hat[k]),
            fmt_f64(rep.std_errors[k]),
            fmt_f64(rep.t_stats[k])
        );
    }
    write_text(&ctx.out.join("estimate.csv"), &csv)?;
    let table = summary_table(&labels, &est);
    write_text(&ctx.out.join("estimate.txt"), &format!("{head}{table}"))?;

    let mut j = head.clone();
    j.push_str("statistic,value\n");
    let _ = writeln!(j, "J,{}", fmt_f64(rep.j.stat));
    let _ = writeln!(j, "p_value,{}", fmt_f64(rep.j.p_value));
    let _ = writeln!(j, "df,{}", rep.j.df);
    let _ = writeln!(j, "n_draws,{}", rep.j.n_draws);
    let _ = writeln!(j, "chi2_mode,{}", u8::from(rep.j.mode == fcsmm::infer::JMode::Chi2));
    write_text(&ctx.out.join("jtest.csv"), &j)?;

    let theta = DMatrix::from_column_slice(labels.len(), 1, &r.theta_hat);
    write_matrix(&ctx.out.join("theta.csv"), &head, &labels, &["value".into()], &theta)?;
    write_matrix(&ctx.out.join("sigma.csv"), &head, &moments, &moments, &rep.sigma)?;
    write_matrix(&ctx.out.join("weight.csv"), &head, &moments, &moments, &r.weight)?;
    write_matrix(&ctx.out.join("jacobian.csv"), &head, &moments, &labels, &rep.jacobian)?;
    write_matrix(&ctx.out.join("omega.csv"), &head, &labels, &labels, &rep.omega)?;
    let gap = DMatrix::from_fn(moments.len(), 3, |i, c| match c {
        0 => p.psi_t()[i],
        1 => r.psi_sim_at_hat[i],
        _ => p.psi_t()[i] - r.psi_sim_at_hat[i],
    });
    write_matrix(
        &ctx.out.join("psi_gap.csv"),
        &head,
        &moments,
        &["psi_t".into(), "psi_sim".into(), "gap".into()],
        &gap,
    )?;
    let meta = DMatrix::from_column_slice(
        4,
        1,
        &[p.t() as f64, f64::from(u8::from(r.first_step.is_some())), rep.n_draws as f64, r.objective],
    );
    write_matrix(
        &ctx.out.join("run.csv"),
        &head,
        &["T".into(), "two_step".into(), "n_draws".into(), "objective".into()],
        &["value".into()],
        &meta,
    )?;

    let observed = p.observed().expect("estimation keeps the observed panel");
    let emp = empirical_moments(observed, &curve_spec)?;
    let fit = simulated_moments(&p.simulate(&r.theta_hat)?, &curve_spec)?;
    let mut c = head;
    c.push_str("group,tau,empirical,fitted\n");
    for q in 0..curve_spec.blocks().len() {
        for (k, tau) in CURVE_TAUS.iter().enumerate() {
            let i = q * CURVE_TAUS.len() + k;
            let _ = writeln!(c, "{},{tau},{},{}", q + 1, fmt_f64(emp[i]), fmt_f64(fit[i]));
        }
    }
    write_text(&ctx.out.join("qdep_curve.csv"), &c)?;
    print!("{table}");
    Ok(())
}
