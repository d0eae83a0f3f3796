use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fcsmm::infer::{j_test, regularized_inverse, JMode, JTest};
use fcsmm::seeds::{derive_seed, purpose};
use nalgebra::DMatrix;

use crate::config::{JModeChoice, RunConfig};
use crate::csvio::{fmt_f64, read_matrix, require_file, write_text, NamedMatrix};
use crate::error::CliError;
use crate::Ctx;

fn artifact(dir: &Path, name: &str) -> Result<NamedMatrix, CliError> {
    let path = dir.join(name);
    require_file(&path, &format!("estimation artifact {name}"))?;
    read_matrix(&path)
}

fn meta_value(rows: &[String], m: &DMatrix<f64>, key: &str, path: &Path) -> Result<f64, CliError> {
    rows.iter()
        .position(|r| r == key)
        .map(|i| m[(i, 0)])
        .ok_or_else(|| CliError::Data(format!("{}: missing entry `{key}`", path.display())))
}

/// J statistic and p-value recomputed from the artifacts of an `estimate` run.
pub fn recompute(cfg: &RunConfig, ctx: &Ctx, dir: &Path) -> Result<JTest, CliError> {
    let (_, _, theta) = artifact(dir, "theta.csv")?;
    let (_, _, sigma) = artifact(dir, "sigma.csv")?;
    let (_, _, jac) = artifact(dir, "jacobian.csv")?;
    let (_, _, weight) = artifact(dir, "weight.csv")?;
    let (_, gap_cols, gap) = artifact(dir, "psi_gap.csv")?;
    let (meta_rows, _, meta) = artifact(dir, "run.csv")?;
    let run_path = dir.join("run.csv");
    let t = meta_value(&meta_rows, &meta, "T", &run_path)?;
    let two_step = meta_value(&meta_rows, &meta, "two_step", &run_path)? != 0.0;
    let stored_draws = meta_value(&meta_rows, &meta, "n_draws", &run_path)?;
    if jac.ncols() != theta.nrows() {
        return Err(CliError::Data(format!(
            "jacobian.csv has {} columns for {} parameters",
            jac.ncols(),
            theta.nrows()
        )));
    }
    let g_col = gap_cols
        .iter()
        .position(|c| c == "gap")
        .ok_or_else(|| CliError::Data(format!("{}: no `gap` column", dir.join("psi_gap.csv").display())))?;
    let g: Vec<f64> = gap.column(g_col).iter().copied().collect();
    let mode = match cfg.jtest.mode {
        JModeChoice::Auto if two_step => JMode::Chi2,
        JModeChoice::Auto | JModeChoice::Simulated => JMode::Simulated,
        JModeChoice::Chi2 => JMode::Chi2,
    };
    let w = match mode {
        JMode::Chi2 => regularized_inverse(&sigma)?.0,
        JMode::Simulated => weight,
    };
    let n_draws = cfg.jtest.n_draws.unwrap_or(stored_draws as usize);
    Ok(j_test(
        &g,
        &w,
        &sigma,
        &jac,
        t as usize,
        mode,
        n_draws,
        derive_seed(ctx.seed, &[purpose::J_DRAWS]),
    )?)
}

pub fn cmd_jtest(cfg: &RunConfig, ctx: &Ctx) -> Result<(), CliError> {
    let dir: PathBuf = cfg.jtest.artifacts.clone().unwrap_or_else(|| ctx.out.clone());
    let j = recompute(cfg, ctx, &dir)?;
    let mut s = String::new();
    let _ = writeln!(s, "# seed = {}", ctx.seed);
    let _ = writeln!(s, "# artifacts = {}", dir.display());
    let _ = writeln!(s, "# mode = {:?}, n_draws = {}", j.mode, j.n_draws);
    s.push_str("statistic,value\n");
    let _ = writeln!(s, "J,{}", fmt_f64(j.stat));
    let _ = writeln!(s, "p_value,{}", fmt_f64(j.p_value));
    let _ = writeln!(s, "df,{}", j.df);
    let _ = writeln!(s, "n_draws,{}", j.n_draws);
    let _ = writeln!(s, "chi2_mode,{}", u8::from(j.mode == JMode::Chi2));
    write_text(&ctx.out.join("jtest_recomputed.csv"), &s)?;
    println!("J = {:.6} (df {}), p-value {:.4}, {:?}", j.stat, j.df, j.p_value, j.mode);
    for w in &j.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
