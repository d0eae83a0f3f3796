mod common;

use common::{bin, cli, header, rows, simulate, write_config, write_returns};
use fcsmm::mc::{DesignId, McZMode};

fn toy_column(seed: u64, t: usize) -> Vec<f64> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..t)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 1.5
        })
        .collect()
}

#[test]
fn constant_margins_give_standardized_columns() {
    let dir = tempfile::tempdir().unwrap();
    let t = 300;
    let cols: Vec<Vec<f64>> = (1..=3).map(|s| toy_column(s, t)).collect();
    let mut csv = String::from("date,a,b,c\n");
    for k in 0..t {
        csv.push_str(&format!("d{k:04},{},{},{}\n", cols[0][k], cols[1][k], cols[2][k]));
    }
    std::fs::write(dir.path().join("returns.csv"), csv).unwrap();
    let cfg = write_config(
        dir.path(),
        "filter.toml",
        "[data]\nreturns = \"returns.csv\"\n[margins]\nmean = \"constant\"\nvariance = \"constant\"\n",
    );
    let out = dir.path().join("out");
    cli("filter", &cfg, &out, &[]).unwrap();
    let path = out.join("residuals.csv");
    assert_eq!(header(&path), ["date", "a", "b", "c"]);
    let r = rows(&path);
    assert_eq!(r.len(), t);
    for (i, c) in cols.iter().enumerate() {
        let m = c.iter().sum::<f64>() / t as f64;
        let sd = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / t as f64).sqrt();
        for k in 0..t {
            let e: f64 = r[k][i + 1].parse().unwrap();
            assert!((e - (c[k] - m) / sd).abs() < 1e-5, "{i} {k}: {e}");
        }
    }
    for (k, row) in r.iter().enumerate() {
        assert_eq!(row[0], format!("d{k:04}"));
    }
}

#[test]
fn descriptives_match_recomputed_moments() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(DesignId::Design1, McZMode::Observable, 3, 500, None, 11);
    write_returns(dir.path(), &data);
    let cfg = write_config(
        dir.path(),
        "filter.toml",
        "[data]\nreturns = \"returns.csv\"\ncolumns = [\"s01\", \"s02\", \"s03\"]\n",
    );
    let out = dir.path().join("out");
    cli("filter", &cfg, &out, &[]).unwrap();
    let d = rows(&out.join("descriptives.csv"));
    assert_eq!(header(&out.join("descriptives.csv")), ["series", "mean", "std", "skewness", "kurtosis"]);
    for (i, y) in data.y.iter().enumerate() {
        // two-pass moments with compensated sums
        let n = y.len() as f64;
        let kahan = |f: &dyn Fn(f64) -> f64| {
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for &v in y {
                let t = f(v) - c;
                let u = s + t;
                c = (u - s) - t;
                s = u;
            }
            s / n
        };
        let m = kahan(&|v| v);
        let m2 = kahan(&|v| (v - m).powi(2));
        let m3 = kahan(&|v| (v - m).powi(3));
        let m4 = kahan(&|v| (v - m).powi(4));
        let want = [m, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2)];
        assert_eq!(d[i][0], format!("s{:02}", i + 1));
        for (k, w) in want.iter().enumerate() {
            let got: f64 = d[i][k + 1].parse().unwrap();
            assert!((got - w).abs() <= 1e-10 * w.abs().max(1.0), "{i} {k}: {got} vs {w}");
        }
    }
}

#[test]
fn gjr_exog_skewt_margins_report_eleven_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(DesignId::Design1, McZMode::Observable, 3, 600, None, 12);
    write_returns(dir.path(), &data);
    let cfg = write_config(
        dir.path(),
        "filter.toml",
        r#"
[data]
returns = "returns.csv"

[margins]
mean = "ar1_exog"
variance = "gjr_exog"
innovation = "skew_t"
exog = "gold"

[factor]
column = "gold"
source = { log_abs = "gjr" }
"#,
    );
    let out = dir.path().join("out");
    cli("filter", &cfg, &out, &[]).unwrap();
    let m = rows(&out.join("margins.csv"));
    for s in ["s01", "s02", "s03"] {
        let params: Vec<&Vec<String>> = m
            .iter()
            .filter(|r| r[0] == s && !["loglik", "converged", "iterations"].contains(&r[1].as_str()))
            .collect();
        assert_eq!(params.len(), 11, "{s}");
        let shape = params.iter().filter(|r| r[1] == "zeta" || r[1] == "xi").count();
        assert_eq!(shape, 2);
        assert!(m.iter().any(|r| r[0] == s && r[1] == "loglik"));
    }
    assert!(!m.iter().any(|r| r[0] == "gold"));
    let z = rows(&out.join("factor.csv"));
    assert_eq!(z.len(), 600);
    assert_eq!(header(&out.join("factor.csv")), ["date", "z_hat"]);
    let r = header(&out.join("residuals.csv"));
    assert_eq!(r, ["date", "s01", "s02", "s03"]);
}

#[test]
fn missing_cells_are_listed_and_exit_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("returns.csv"), "date,a,b\nx1,0.1,0.2\nx2,0.3,\nx3,0.5,0.1\nx4,NA,0.4\n").unwrap();
    let cfg = write_config(dir.path(), "f.toml", "[data]\nreturns = \"returns.csv\"\n");
    let out = dir.path().join("out");
    let o = bin(&["filter", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2 column `b`"), "{err}");
    assert!(err.contains("row 4 column `a`"), "{err}");
    assert!(!out.join("residuals.csv").exists());
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("returns.csv"), "a,b\n0.1,0.2\n0.3,0.1\n").unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let unknown = write_config(dir.path(), "a.toml", "[data]\nreturns = \"returns.csv\"\nbogus = 1\n");
    let o = bin(&["filter", "--config", unknown.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let missing = write_config(dir.path(), "b.toml", "[data]\nreturns = \"returns.csv\"\ncolumns = [\"a\", \"zz\"]\n");
    let o = bin(&["filter", "--config", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`zz`"));
    let wrong_mode = write_config(dir.path(), "c.toml", "mode = \"estimate\"\n[data]\nreturns = \"returns.csv\"\n");
    let o = bin(&["filter", "--config", wrong_mode.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let nofile = write_config(dir.path(), "d.toml", "[data]\nreturns = \"nothere.csv\"\n");
    let o = bin(&["filter", "--config", nofile.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothere.csv"));
}

#[test]
fn output_directory_comes_from_environment_when_no_flag() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(DesignId::Design1, McZMode::Observable, 2, 200, None, 3);
    write_returns(dir.path(), &data);
    let cfg = write_config(dir.path(), "f.toml", "output_dir = \"cfg_out\"\n[data]\nreturns = \"returns.csv\"\n");
    let env_out = dir.path().join("env_out");
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_fcsmm"))
        .args(["filter", "--config", cfg.to_str().unwrap(), "--workers", "1"])
        .env("FCSMM_OUT", &env_out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_out.join("residuals.csv").exists());
    assert!(!dir.path().join("cfg_out").exists());
}
