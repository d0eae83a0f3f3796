mod common;

use common::{cli, header, rows, write_config};

const SMOKE: &str = r#"
[montecarlo]
id = "design1"
z_mode = "observable"
n = 6
t = 200
s = 5
reps = 20
seed = 3
n_starts = 16
n_candidates = 2
bootstrap_reps = 50
n_draws = 500
"#;

#[test]
fn reduced_design_writes_summary_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mc.toml", SMOKE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cli("montecarlo", &cfg, &a, &[]).unwrap();
    let summary = a.join("mc_summary.csv");
    assert_eq!(header(&summary), ["parameter", "mean", "median", "var", "rmse", "t", "J"]);
    let r = rows(&summary);
    let labels: Vec<&str> = r.iter().map(|x| x[0].as_str()).collect();
    assert_eq!(labels, ["alpha.1.1", "beta.1.1", "gamma.1.zeta", "gamma.1.xi"]);
    for row in &r {
        let v: Vec<f64> = row[1..].iter().map(|x| x.parse().unwrap()).collect();
        // rmse^2 = var + bias^2
        assert!(v[3] * v[3] >= v[2] * (1.0 - 1e-12));
        assert!((0.0..=100.0).contains(&v[4]) && (0.0..=100.0).contains(&v[5]));
    }
    assert_eq!(rows(&a.join("mc_replications.csv")).len(), 20);
    let text = std::fs::read_to_string(a.join("mc_summary.txt")).unwrap();
    for key in ["# design = design1", "mean", "median", "rmse"] {
        assert!(text.contains(key), "{key}");
    }
    cli("montecarlo", &cfg, &b, &["--workers", "1"]).unwrap();
    for f in ["mc_summary.csv", "mc_summary.txt", "mc_replications.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn invalid_design_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMOKE.replace("id = \"design1\"", "id = \"design2\"").replace("n = 6", "n = 7");
    let cfg = write_config(dir.path(), "mc.toml", &body);
    let err = cli("montecarlo", &cfg, &dir.path().join("o"), &[]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let none = write_config(dir.path(), "none.toml", "seed = 1\n");
    let err = cli("montecarlo", &none, &dir.path().join("o"), &[]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
