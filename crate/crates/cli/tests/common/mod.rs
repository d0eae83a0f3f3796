#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use clap::Parser;
use fcsmm::mc::{DesignId, Dgp, McData, McDesign, McZMode};
use fcsmm_cli::csvio::{write_table, Table};
use fcsmm_cli::error::CliError;
use fcsmm_cli::{run, Cli};

/// Returns (and the factor series, when the design has one) of a simulated data set.
pub fn simulate(id: DesignId, z_mode: McZMode, n: usize, t: usize, truth: Option<Vec<f64>>, seed: u64) -> McData {
    let mut d = McDesign::new(id, z_mode, n, t);
    d.truth = truth;
    Dgp::new(&d).unwrap().simulate(seed).unwrap()
}

pub fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("s{i:02}")).collect()
}

pub fn dates(t: usize) -> Vec<String> {
    (0..t).map(|k| format!("2014-{:02}-{:02}", 1 + (k / 28) % 12, 1 + k % 28)).collect()
}

/// Writes `returns.csv` with a date column, one column per series and a
/// `gold` column when the data carry a factor series.
pub fn write_returns(dir: &Path, data: &McData) -> PathBuf {
    let t = data.y[0].len();
    let mut names = names(data.y.len());
    let mut columns = data.y.clone();
    if let Some(w) = &data.w {
        names.push("gold".into());
        columns.push(w.clone());
    }
    let path = dir.join("returns.csv");
    write_table(
        &path,
        "",
        &Table {
            dates: Some(("date".into(), dates(t))),
            names,
            columns,
        },
    )
    .unwrap();
    path
}

pub fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Runs a subcommand in-process.
pub fn cli(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Result<(), CliError> {
    let mut args = vec![
        "fcsmm".to_string(),
        cmd.to_string(),
        "--config".into(),
        config.display().to_string(),
        "--out".into(),
        out.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    run(&Cli::parse_from(args))
}

/// Runs the binary.
pub fn bin(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_fcsmm"))
        .args(args)
        .output()
        .unwrap()
}

/// Data rows of a written CSV (comment lines and header skipped).
pub fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

pub fn header(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| !l.starts_with('#')).unwrap();
    line.split(',').map(str::to_string).collect()
}

/// `statistic,value` files keyed by the first column.
pub fn value(path: &Path, key: &str) -> f64 {
    rows(path)
        .into_iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("{key} missing in {}", path.display()))[1]
        .parse()
        .unwrap()
}
