use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fcsmm::margins::{estimable_factor, fit_margin, FactorSource};

use crate::config::RunConfig;
use crate::csvio::{fmt_f64, read_table, write_table, write_text, Table};
use crate::error::CliError;
use crate::Ctx;

/// Residuals of the modeled columns and the estimated factor.
#[derive(Debug, Clone)]
pub struct Filtered {
    pub dates: Option<(String, Vec<String>)>,
    pub columns: Vec<String>,
    pub eta: Vec<Vec<f64>>,
    pub z_hat: Option<Vec<f64>>,
}

pub struct MarginReport {
    pub series: String,
    pub names: Vec<&'static str>,
    pub lambda: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Raw returns plus the names of the modeled columns.
pub struct RawData {
    pub path: PathBuf,
    pub table: Table,
    pub columns: Vec<String>,
}

pub fn load_returns(cfg: &RunConfig) -> Result<RawData, CliError> {
    let path = cfg
        .data
        .returns
        .clone()
        .ok_or_else(|| CliError::Config("[data] returns is required".into()))?;
    let table = read_table(&path)?;
    let columns = match &cfg.data.columns {
        Some(c) => {
            table.select(c, &path)?;
            c.clone()
        }
        None => {
            let mut skip: Vec<&str> = Vec::new();
            if let Some(f) = &cfg.factor {
                if f.file.is_none() {
                    skip.push(&f.column);
                }
            }
            if let Some(x) = &cfg.margins.exog {
                skip.push(x);
            }
            table.names.iter().filter(|n| !skip.contains(&n.as_str())).cloned().collect()
        }
    };
    if columns.len() < 2 {
        return Err(CliError::Config(format!("need at least two modeled columns, got {}", columns.len())));
    }
    Ok(RawData { path, table, columns })
}

/// A column from the returns file or from the factor file.
fn auxiliary(cfg: &RunConfig, raw: &RawData, name: &str, file: Option<&Path>) -> Result<Vec<f64>, CliError> {
    let v = match file {
        Some(p) => {
            let t = read_table(p)?;
            if t.rows() != raw.table.rows() {
                return Err(CliError::Data(format!(
                    "{} has {} rows, {} has {}",
                    p.display(),
                    t.rows(),
                    raw.path.display(),
                    raw.table.rows()
                )));
            }
            if let (Some((_, a)), Some((_, b))) = (&t.dates, &raw.table.dates) {
                if a != b {
                    return Err(CliError::Data(format!("dates of {} and {} differ", p.display(), raw.path.display())));
                }
            }
            t.select(&[name.to_string()], p)?.remove(0)
        }
        None => {
            let from_factor = cfg.factor.as_ref().and_then(|f| f.file.clone());
            match (raw.table.column(name), from_factor) {
                (Some(c), _) => c.to_vec(),
                (None, Some(p)) => return auxiliary(cfg, raw, name, Some(&p)),
                (None, None) => raw.table.select(&[name.to_string()], &raw.path)?.remove(0),
            }
        }
    };
    Ok(v)
}

/// Fits every margin and recovers the factor.
pub fn run_filter(cfg: &RunConfig, raw: &RawData) -> Result<(Filtered, Vec<MarginReport>), CliError> {
    let exog = match &cfg.margins.exog {
        Some(x) => Some(auxiliary(cfg, raw, x, None)?),
        None => None,
    };
    let mut eta = Vec::with_capacity(raw.columns.len());
    let mut reports = Vec::with_capacity(raw.columns.len());
    for name in &raw.columns {
        let y = raw.table.column(name).expect("selected column");
        let shape = cfg.margins.shape_of(name);
        let x = if shape.uses_exog() {
            Some(exog.as_deref().ok_or_else(|| {
                CliError::Config(format!("margin of `{name}` uses an exogenous regressor but [margins] exog is not set"))
            })?)
        } else {
            None
        };
        let (model, diag) = fit_margin(y, x, shape).map_err(|e| CliError::Numerical(format!("margin `{name}`: {e}")))?;
        eta.push(model.filter_residuals(y, x)?);
        reports.push(MarginReport {
            series: name.clone(),
            names: shape.param_names(),
            lambda: model.lambda().to_vec(),
            std_errors: diag.std_errors.clone(),
            loglik: diag.loglik,
            converged: diag.converged,
            iterations: diag.iterations,
        });
    }
    let z_hat = match &cfg.factor {
        Some(f) => {
            let w = auxiliary(cfg, raw, &f.column, f.file.as_deref())?;
            let x = match f.source {
                FactorSource::LogAbs(v) if v.uses_exog() => exog.as_deref(),
                _ => None,
            };
            Some(estimable_factor(&w, x, f.source)?.z_hat)
        }
        None => None,
    };
    Ok((
        Filtered {
            dates: raw.table.dates.clone(),
            columns: raw.columns.clone(),
            eta,
            z_hat,
        },
        reports,
    ))
}

/// Mean, standard deviation, skewness and kurtosis (moments with divisor T).
pub fn descriptives(x: &[f64]) -> [f64; 4] {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let c = |p: i32| x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / n;
    let (m2, m3, m4) = (c(2), c(3), c(4));
    [m, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2)]
}

pub fn settings_header(cfg: &RunConfig, ctx: &Ctx) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# seed = {}", ctx.seed);
    let _ = writeln!(s, "# margins = {:?}", cfg.margins.default);
    for (k, v) in &cfg.margins.series {
        let _ = writeln!(s, "# margins.{k} = {v:?}");
    }
    if let Some(f) = &cfg.factor {
        let _ = writeln!(s, "# factor = {} ({:?})", f.column, f.source);
    }
    s
}

pub fn cmd_filter(cfg: &RunConfig, ctx: &Ctx) -> Result<(), CliError> {
    let raw = load_returns(cfg)?;
    let (f, reports) = run_filter(cfg, &raw)?;
    let head = settings_header(cfg, ctx);
    write_table(
        &ctx.out.join("residuals.csv"),
        &head,
        &Table {
            dates: f.dates.clone(),
            names: f.columns.clone(),
            columns: f.eta.clone(),
        },
    )?;
    if let Some(z) = &f.z_hat {
        write_table(
            &ctx.out.join("factor.csv"),
            &head,
            &Table {
                dates: f.dates.clone(),
                names: vec!["z_hat".into()],
                columns: vec![z.clone()],
            },
        )?;
    }
    let mut m = head.clone();
    m.push_str("series,parameter,estimate,std_error\n");
    for r in &reports {
        for (k, name) in r.names.iter().enumerate() {
            let se = r.std_errors.as_ref().map_or(f64::NAN, |s| s[k]);
            let _ = writeln!(m, "{},{name},{},{}", r.series, fmt_f64(r.lambda[k]), fmt_f64(se));
        }
        let _ = writeln!(m, "{},loglik,{},", r.series, fmt_f64(r.loglik));
        let _ = writeln!(m, "{},converged,{},", r.series, u8::from(r.converged));
        let _ = writeln!(m, "{},iterations,{},", r.series, r.iterations);
    }
    write_text(&ctx.out.join("margins.csv"), &m)?;

    let mut d = head;
    d.push_str("series,mean,std,skewness,kurtosis\n");
    for name in &raw.columns {
        let v = descriptives(raw.table.column(name).expect("selected column"));
        let _ = writeln!(d, "{name},{}", v.map(fmt_f64).join(","));
    }
    write_text(&ctx.out.join("descriptives.csv"), &d)?;

    let mut txt = format!("{:<12}{:>12}{:>10}  parameters\n", "series", "loglik", "converged");
    for r in &reports {
        let ps: Vec<String> = r.names.iter().zip(&r.lambda).map(|(n, v)| format!("{n}={v:.4}")).collect();
        let _ = writeln!(txt, "{:<12}{:>12.3}{:>10}  {}", r.series, r.loglik, r.converged, ps.join(" "));
    }
    print!("{txt}");
    Ok(())
}
