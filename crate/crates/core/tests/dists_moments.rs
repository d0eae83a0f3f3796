mod common;

use common::{mean, rng, uniform, variance};
use fcsmm::dists::{logabsnormal_quantile, skewt_quantile, SkewT, SkewTTable, LOGABS_MEAN, LOGABS_VAR};

const DRAWS: usize = 1_000_000;

#[test]
fn skewt_draws_are_standardized() {
    for (k, &(zeta, xi)) in [(0.25, -0.5), (0.1, 0.3), (1.0 / 3.0, 0.0)].iter().enumerate() {
        let d = SkewT::new(zeta, xi).unwrap();
        let table = SkewTTable::new(d);
        let mut r = rng(11 + k as u64);
        let x: Vec<f64> = (0..DRAWS).map(|_| table.quantile(uniform(&mut r))).collect();
        let (m, v) = (mean(&x), variance(&x));
        let se_mean = (v / DRAWS as f64).sqrt();
        let fourth = x.iter().map(|z| (z - m).powi(4)).sum::<f64>() / DRAWS as f64;
        let se_var = ((fourth - v * v) / DRAWS as f64).sqrt();
        assert!(m.abs() < 4.0 * se_mean, "zeta={zeta} xi={xi} mean {m}");
        assert!((v - 1.0).abs() < 4.0 * se_var, "zeta={zeta} xi={xi} var {v} se {se_var}");
    }
}

#[test]
fn exact_and_tabulated_quantiles_agree_on_draws() {
    let d = SkewT::new(0.25, -0.5).unwrap();
    let table = SkewTTable::new(d);
    let mut r = rng(5);
    for _ in 0..10_000 {
        let u = uniform(&mut r);
        let a = skewt_quantile(u, &d).unwrap();
        let b = table.quantile(u);
        assert!((a - b).abs() < 1e-8 * a.abs().max(1.0));
    }
}

#[test]
fn logabs_sample_moments() {
    let mut r = rng(3);
    let z: Vec<f64> = (0..DRAWS).map(|_| logabsnormal_quantile(uniform(&mut r)).unwrap()).collect();
    let (m, v) = (mean(&z), variance(&z));
    assert!((m - (-0.6352)).abs() < 0.005, "mean {m}");
    assert!((v - 1.2337).abs() < 0.01, "var {v}");
    assert!((m - LOGABS_MEAN).abs() < 0.005);
    assert!((v - LOGABS_VAR).abs() < 0.01);
}
