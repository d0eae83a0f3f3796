mod common;

use common::{mean, variance};
use fcsmm::depmeas::{simulated_moments, Measure, MomentSpec};
use fcsmm::simcore::{make_draw_bank, simulate_panel, BankDims, FactorCopulaSpec, Family, Panel, ZFamily, ZMode};

fn design1_spec(n: usize) -> FactorCopulaSpec {
    FactorCopulaSpec::new(vec![0; n], 1, 1, vec![Family::SkewT], Family::SkewT, ZMode::Estimable)
        .unwrap()
        .tie("delta.zeta", "gamma.1.zeta")
        .unwrap()
        .fix("delta.xi", 0.0)
        .unwrap()
}

fn gaussian_spec(n: usize) -> FactorCopulaSpec {
    FactorCopulaSpec::new(
        vec![0; n],
        1,
        1,
        vec![Family::Normal],
        Family::Normal,
        ZMode::Simulable(ZFamily::Normal),
    )
    .unwrap()
}

/// Sub-panel of two series restricted to slot `s`.
fn slot_pair(p: &Panel, i: usize, j: usize, s: usize) -> Panel {
    let t = p.t();
    let data: Vec<f64> = [i, j]
        .iter()
        .flat_map(|&k| (0..t).map(move |tt| p.get(k, tt, s)))
        .collect();
    Panel::new(2, t, 1, data).unwrap()
}

fn pair(p: &Panel, i: usize, j: usize) -> Panel {
    let mut data = p.series(i).to_vec();
    data.extend_from_slice(p.series(j));
    Panel::new(2, p.t(), p.s(), data).unwrap()
}

fn spearman_spec() -> MomentSpec {
    MomentSpec::new(&[Measure::Spearman], &[0, 0]).unwrap()
}

/// Pooled Spearman of `(i, j)` and its standard error from the `S`
/// independent slot estimates.
fn pooled_with_se(p: &Panel, i: usize, j: usize) -> (f64, f64) {
    let spec = spearman_spec();
    let pooled = simulated_moments(&pair(p, i, j), &spec).unwrap()[0];
    let slots: Vec<f64> = (0..p.s())
        .map(|s| simulated_moments(&slot_pair(p, i, j, s), &spec).unwrap()[0])
        .collect();
    (pooled, (variance(&slots) / p.s() as f64).sqrt())
}

#[test]
fn bank_is_deterministic_and_uniform() {
    let dims = BankDims::new(4, 1000, 25, 1).with_simulable_z(1);
    let a = make_draw_bank(dims, 42).unwrap();
    let b = make_draw_bank(dims, 42).unwrap();
    assert_eq!(a, b);
    assert!(a.eps_u().iter().zip(b.eps_u()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let c = make_draw_bank(dims, 43).unwrap();
    assert_ne!(a.eps_u(), c.eps_u());

    // Kolmogorov-Smirnov at the 1% level on 1e5 pooled uniforms
    let mut u: Vec<f64> = a.eps_u()[..100_000].to_vec();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(k, x)| ((k as f64 + 1.0) / n - x).max(x - k as f64 / n))
        .fold(0.0, f64::max);
    assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
    let all = a.eps_u().iter().chain(a.factor_u()).chain(a.z_u());
    assert!(all.clone().all(|x| *x > 0.0 && *x < 1.0));
    assert_eq!(a.factor_u().len(), 25_000);
    assert_eq!(a.z_u().len(), 25_000);
}

#[test]
fn independence_without_loadings() {
    let (t, s) = (500, 25);
    let spec = design1_spec(3);
    let bank = make_draw_bank(BankDims::new(3, t, s, 1), 1).unwrap();
    let z = vec![0.3; t];
    let p = simulate_panel(&spec, &[0.0, 0.0, 0.25, -0.5], Some(&z), &bank).unwrap();
    let bound = 3.0 / ((t * s) as f64).sqrt();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let rho = simulated_moments(&pair(&p, i, j), &spearman_spec()).unwrap()[0];
        assert!(rho.abs() < bound, "pair ({i},{j}): {rho}");
    }
}

#[test]
fn gaussian_correlation_and_spearman_link() {
    let (t, s) = (2000, 25);
    let spec = gaussian_spec(2);
    let bank = make_draw_bank(BankDims::new(2, t, s, 1).with_simulable_z(1), 77).unwrap();
    let p = simulate_panel(&spec, &[0.0, 1.0], None, &bank).unwrap();
    let (x, y) = (p.series(0), p.series(1));
    let (mx, my) = (mean(x), mean(y));
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() - 1) as f64;
    let corr = cov / (variance(x) * variance(y)).sqrt();
    assert!((corr - 0.5).abs() < 0.01, "corr {corr}");

    for rho in [0.3f64, 0.5, 0.7] {
        let beta = (rho / (1.0 - rho)).sqrt();
        let p = simulate_panel(&spec, &[0.0, beta], None, &bank).unwrap();
        let (pooled, se) = pooled_with_se(&p, 0, 1);
        let target = 6.0 / std::f64::consts::PI * (rho / 2.0).asin();
        assert!((pooled - target).abs() < 3.0 * se, "rho {rho}: {pooled} vs {target} (se {se})");
    }
}

#[test]
fn design1_shares_loadings_within_group() {
    let (t, s) = (500, 25);
    let spec = design1_spec(4);
    let bank = make_draw_bank(BankDims::new(4, t, s, 1), 5).unwrap();
    let z: Vec<f64> = common::normals(&mut common::rng(8), t);
    let p = simulate_panel(&spec, &[1.0, 0.5, 0.25, -0.5], Some(&z), &bank).unwrap();
    let (a, se_a) = pooled_with_se(&p, 0, 1);
    let (b, se_b) = pooled_with_se(&p, 2, 3);
    assert!((a - b).abs() < 2.0 * (se_a * se_a + se_b * se_b).sqrt(), "{a} vs {b}");
    assert!(a > 0.3);
}

#[test]
fn continuous_in_theta() {
    let (t, s) = (200, 5);
    let spec = design1_spec(3);
    let bank = make_draw_bank(BankDims::new(3, t, s, 1), 9).unwrap();
    let z: Vec<f64> = common::normals(&mut common::rng(1), t);
    let theta = [1.0, 0.5, 0.25, -0.5];
    let base = simulate_panel(&spec, &theta, Some(&z), &bank).unwrap();
    for k in 0..theta.len() {
        let mut th = theta;
        th[k] += 1e-9;
        let moved = simulate_panel(&spec, &th, Some(&z), &bank).unwrap();
        let diff = base
            .data()
            .iter()
            .zip(moved.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6, "param {k}: max change {diff}");
    }
}

#[test]
fn slot_permutation_leaves_pooled_statistics_unchanged() {
    let (t, s) = (100, 6);
    let spec = design1_spec(3);
    let bank = make_draw_bank(BankDims::new(3, t, s, 1), 21).unwrap();
    let z: Vec<f64> = common::normals(&mut common::rng(2), t);
    let theta = [1.0, 0.5, 0.25, -0.5];
    let menu = [Measure::Spearman, Measure::Qdep(0.15), Measure::Qdep(0.85), Measure::Kendall];
    let ms = MomentSpec::new(&menu, &[0, 0, 0]).unwrap();
    let base = simulated_moments(&simulate_panel(&spec, &theta, Some(&z), &bank).unwrap(), &ms).unwrap();
    let permuted = bank.permute_s(&[3, 0, 5, 1, 4, 2]).unwrap();
    let other = simulated_moments(&simulate_panel(&spec, &theta, Some(&z), &permuted).unwrap(), &ms).unwrap();
    assert_eq!(base, other);
}

#[test]
fn simulation_is_deterministic() {
    let (t, s) = (50, 4);
    let spec = design1_spec(3);
    let z: Vec<f64> = common::normals(&mut common::rng(3), t);
    let theta = [1.0, 0.5, 0.25, -0.5];
    let a = simulate_panel(&spec, &theta, Some(&z), &make_draw_bank(BankDims::new(3, t, s, 1), 4).unwrap()).unwrap();
    let b = simulate_panel(&spec, &theta, Some(&z), &make_draw_bank(BankDims::new(3, t, s, 1), 4).unwrap()).unwrap();
    assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn domain_errors_name_the_slot() {
    let spec = design1_spec(2);
    let bank = make_draw_bank(BankDims::new(2, 10, 2, 1), 4).unwrap();
    let z = vec![0.0; 10];
    let err = simulate_panel(&spec, &[1.0, 0.5, 0.7, -0.5], Some(&z), &bank).unwrap_err();
    assert!(err.to_string().contains("gamma.1.zeta"), "{err}");
    let err = simulate_panel(&spec, &[1.0, 0.5, 0.2, 1.5], Some(&z), &bank).unwrap_err();
    assert!(err.to_string().contains("gamma.1.xi"), "{err}");
    assert!(simulate_panel(&spec, &[1.0, 0.5, 0.2, 0.1], None, &bank).is_err());
    assert!(simulate_panel(&spec, &[1.0, 0.5, 0.2, 0.1], Some(&z[..5]), &bank).is_err());
}
