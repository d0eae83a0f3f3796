mod common;

use common::{normals, rng, uniform};
use fcsmm::depmeas::{empirical_moments, Measure, MomentSpec};
use fcsmm::dists::normal_cdf;
use fcsmm::infer::{
    bootstrap_sigma, bootstrap_sigma_with_indices, infer, j_test, numeric_jacobian, numeric_jacobian_of, omega,
    std_errors, BootstrapMode, Difference, InferenceOptions, JMode,
};
use fcsmm::margins::{fit_margin, MarginModel, MarginShape};
use fcsmm::simcore::{make_draw_bank, simulate_panel, BankDims, FactorCopulaSpec, Family, Panel, ZMode};
use fcsmm::smm::{smm_estimate, SmmOptions, SmmProblem};
use nalgebra::DMatrix;

const THETA0: [f64; 4] = [1.0, 0.5, 0.25, -0.5];

fn design1_spec(n: usize) -> FactorCopulaSpec {
    FactorCopulaSpec::new(vec![0; n], 1, 1, vec![Family::SkewT], Family::SkewT, ZMode::Estimable)
        .unwrap()
        .tie("delta.zeta", "gamma.1.zeta")
        .unwrap()
        .fix("delta.xi", 0.0)
        .unwrap()
}

fn menu() -> Vec<Measure> {
    let mut m = vec![Measure::Spearman];
    m.extend([0.15, 0.25, 0.35, 0.65, 0.75, 0.85].map(Measure::Qdep));
    m
}

fn problem(n: usize, t: usize, s: usize, seed: u64) -> SmmProblem {
    let z = normals(&mut rng(seed), t);
    let data = make_draw_bank(BankDims::new(n, t, 1, 1), seed ^ 0x5555).unwrap();
    let obs = simulate_panel(&design1_spec(n), &THETA0, Some(&z), &data).unwrap();
    let bank = make_draw_bank(BankDims::new(n, t, s, 1), seed + 1).unwrap();
    let ms = MomentSpec::pooled(&menu(), n).unwrap();
    SmmProblem::new(design1_spec(n), ms, obs, Some(z), bank, None).unwrap()
}

fn random_matrix(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
    let mut g = rng(seed);
    DMatrix::from_fn(r, c, |_, _| 2.0 * uniform(&mut g) - 1.0)
}

fn random_spd(l: usize, seed: u64) -> DMatrix<f64> {
    let a = random_matrix(l, l, seed);
    &a * a.transpose() + DMatrix::identity(l, l) * 0.5
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Survival function of the chi-square law with 3 degrees of freedom.
fn chi2_3_sf(x: f64) -> f64 {
    2.0 * (1.0 - normal_cdf(x.sqrt())) + (2.0 * x / std::f64::consts::PI).sqrt() * (-x / 2.0).exp()
}

#[test]
fn jacobian_of_linear_map() {
    let m = DMatrix::from_row_slice(3, 2, &[1.5, -2.0, 0.25, 4.0, -0.75, 3.0]);
    let f = |th: &[f64]| Ok((&m * nalgebra::DVector::from_column_slice(th)).as_slice().to_vec());
    let bounds = [(-10.0, 10.0), (-10.0, 10.0)];
    let j = numeric_jacobian_of(f, &[0.5, 2.0], &bounds, 0.0625).unwrap();
    assert_eq!(j.matrix, m);
    assert_eq!(j.schemes, [Difference::Central, Difference::Central]);

    let m = random_matrix(7, 4, 3);
    let f = |th: &[f64]| Ok((&m * nalgebra::DVector::from_column_slice(th)).as_slice().to_vec());
    let bounds = [(0.0, 1.0); 4];
    let j = numeric_jacobian_of(f, &[0.3, 0.98, 0.01, 0.6], &bounds, 0.05).unwrap();
    assert_eq!(j.schemes[1], Difference::Backward);
    assert_eq!(j.schemes[2], Difference::Forward);
    assert!(max_abs(&(&j.matrix - &m)) < 1e-13);
}

#[test]
fn jacobian_is_stable_across_steps() {
    let p = problem(15, 1000, 25, 21);
    let pi = 0.05;
    let j = numeric_jacobian(&p, &THETA0, pi).unwrap();
    assert_eq!(j, numeric_jacobian(&p, &THETA0, pi).unwrap());
    let half = numeric_jacobian(&p, &THETA0, pi / 2.0).unwrap();
    let double = numeric_jacobian(&p, &THETA0, 2.0 * pi).unwrap();
    // loading and skewness columns; the tail column bends over steps this wide
    for k in [0, 3] {
        let col = j.matrix.column(k);
        for other in [&half, &double] {
            let diff = (col - other.matrix.column(k)).norm();
            assert!(diff <= 0.1 * col.norm(), "column {k}: {diff} vs {}", col.norm());
        }
    }
    assert!(j.matrix.column(0).norm() > j.matrix.column(3).norm());
}

#[test]
fn unresampled_bootstrap_is_zero() {
    let p = problem(5, 120, 3, 2);
    let x = p.simulate(&THETA0).unwrap();
    let idx: Vec<Vec<usize>> = vec![(0..120).collect(); 5];
    let s = bootstrap_sigma_with_indices(p.observed().unwrap(), &x, p.moment_spec(), &idx).unwrap();
    assert!(s.iter().all(|v| *v == 0.0));
}

#[test]
fn bootstrap_covariance_is_symmetric_psd() {
    let p = problem(15, 500, 25, 3);
    let x = p.simulate(&THETA0).unwrap();
    for mode in [BootstrapMode::Joint, BootstrapMode::PerPair] {
        let reps = if mode == BootstrapMode::Joint { 200 } else { 20 };
        let s = bootstrap_sigma(p.observed().unwrap(), &x, p.moment_spec(), reps, 9, mode).unwrap();
        assert_eq!(s, s.transpose());
        let eig = s.clone().symmetric_eigen().eigenvalues;
        let top = eig.iter().fold(0.0f64, |a, v| a.max(*v));
        assert!(top > 0.0);
        assert!(eig.iter().all(|v| *v >= -1e-12 * top), "{eig}");
        assert_eq!(s, bootstrap_sigma(p.observed().unwrap(), &x, p.moment_spec(), reps, 9, mode).unwrap());
    }
}

#[test]
fn bootstrap_variance_of_spearman_under_independence() {
    let t = 1000;
    let ms = MomentSpec::pooled(&[Measure::Spearman], 2).unwrap();
    let flat = Panel::new(2, t, 1, vec![0.0; 2 * t]).unwrap();
    let mut total = 0.0;
    for seed in 0..3 {
        let mut g = rng(40 + seed);
        let eta = Panel::from_series(&[normals(&mut g, t), normals(&mut g, t)]).unwrap();
        let s = bootstrap_sigma(&eta, &flat, &ms, 500, seed, BootstrapMode::Joint).unwrap();
        total += s[(0, 0)];
    }
    let v = total / 3.0;
    assert!((v - 1.0).abs() < 0.15, "{v}");
}

#[test]
fn sandwich_algebra() {
    let (l, p) = (7, 4);
    let g = random_matrix(l, p, 5);
    let sigma = random_spd(l, 6);
    let w = sigma.clone().try_inverse().unwrap();
    let om = omega(&g, &w, &sigma).unwrap();
    let efficient = (g.transpose() * &w * &g).try_inverse().unwrap();
    assert!(max_abs(&(&om - &efficient)) <= 1e-10 * max_abs(&efficient));
    assert_eq!(om, om.transpose());

    let gs = random_matrix(p, p, 7);
    let ss = random_spd(p, 8);
    let om = omega(&gs, &DMatrix::identity(p, p), &ss).unwrap();
    let gi = gs.clone().try_inverse().unwrap();
    let direct = &gi * &ss * gi.transpose();
    assert!(max_abs(&(&om - &direct)) <= 1e-10 * max_abs(&direct));

    let w = random_spd(l, 9);
    let base = omega(&g, &w, &sigma).unwrap();
    assert_eq!(omega(&g, &w, &(&sigma * 4.0)).unwrap(), &base * 4.0);
    let scaled = omega(&g, &w, &(&sigma * 3.0)).unwrap();
    assert!(max_abs(&(&scaled - &base * 3.0)) <= 1e-13 * max_abs(&scaled));

    let se = std_errors(&base, 250);
    for k in 0..p {
        assert_eq!(se[k], (base[(k, k)] / 250.0).sqrt());
    }
    let singular = DMatrix::from_fn(l, p, |i, j| if j == 3 { g[(i, 0)] } else { g[(i, j)] });
    assert!(omega(&singular, &w, &sigma).is_err());
}

#[test]
fn j_p_value_invariant_to_weight_scale() {
    let (l, p) = (7, 4);
    let g = random_matrix(l, p, 10);
    let sigma = random_spd(l, 11);
    let w = random_spd(l, 12);
    let gap: Vec<f64> = (0..l).map(|k| 0.01 * (k as f64 - 3.0)).collect();
    let a = j_test(&gap, &w, &sigma, &g, 500, JMode::Simulated, 2000, 3).unwrap();
    let b = j_test(&gap, &(&w * 2.5), &sigma, &g, 500, JMode::Simulated, 2000, 3).unwrap();
    assert_eq!(a.p_value, b.p_value);
    assert!((b.stat - 2.5 * a.stat).abs() <= 1e-12 * b.stat);
    assert!(a.p_value > 0.0 && a.p_value < 1.0);
}

#[test]
fn simulated_j_matches_chi_square_under_efficient_weight() {
    let (l, p) = (7, 4);
    let g = random_matrix(l, p, 13);
    let sigma = random_spd(l, 14);
    let w = sigma.clone().try_inverse().unwrap();
    let dir: Vec<f64> = (0..l).map(|k| 1.0 + k as f64).collect();
    let base = j_test(&dir, &w, &sigma, &g, 1, JMode::Chi2, 0, 0).unwrap().stat;
    for target in [1.5, 4.0, 9.0] {
        let c = (target / base).sqrt();
        let gap: Vec<f64> = dir.iter().map(|v| v * c).collect();
        let chi = j_test(&gap, &w, &sigma, &g, 1, JMode::Chi2, 0, 0).unwrap();
        let sim = j_test(&gap, &w, &sigma, &g, 1, JMode::Simulated, 200_000, 17).unwrap();
        assert!((chi.stat - target).abs() < 1e-9);
        assert_eq!(chi.df, 3);
        assert!((chi.p_value - chi2_3_sf(chi.stat)).abs() < 1e-10);
        assert!((sim.p_value - chi.p_value).abs() < 0.01, "{target}: {} vs {}", sim.p_value, chi.p_value);
    }
}

#[test]
fn just_identified_j_is_trivial() {
    let g = random_matrix(4, 4, 15);
    let sigma = random_spd(4, 16);
    let w = DMatrix::identity(4, 4);
    let r = j_test(&[0.0; 4], &w, &sigma, &g, 300, JMode::Simulated, 100, 1).unwrap();
    assert_eq!(r.stat, 0.0);
    assert_eq!(r.p_value, 1.0);
    assert_eq!(r.df, 0);
    assert!(!r.warnings.is_empty());
}

#[test]
fn first_step_error_moves_moments_by_root_t() {
    let t = 2000;
    let shape = MarginShape::ar1_garch();
    let truth = MarginModel::new(shape, vec![0.01, 0.05, 0.05, 0.85, 0.1]).unwrap();
    let mut g = rng(77);
    let mut fitted = Vec::new();
    let mut perturbed = Vec::new();
    let common = normals(&mut g, t);
    for _ in 0..4 {
        let own = normals(&mut g, t);
        let eta: Vec<f64> = common.iter().zip(&own).map(|(a, b)| 0.6 * a + 0.8 * b).collect();
        let path = truth.simulate(&eta, None, &truth.stationary_state(None)).unwrap();
        let (model, _) = fit_margin(&path.y, None, shape).unwrap();
        fitted.push(model.filter_residuals(&path.y, None).unwrap());
        let jitter: Vec<f64> = model
            .lambda()
            .iter()
            .map(|v| v + if uniform(&mut g) < 0.5 { -1.0 } else { 1.0 } / (t as f64).sqrt())
            .collect();
        let jittered = MarginModel::new(shape, jitter).unwrap();
        perturbed.push(jittered.filter_residuals(&path.y, None).unwrap());
    }
    let ms = MomentSpec::pooled(&menu(), 4).unwrap();
    let a = empirical_moments(&Panel::from_series(&fitted).unwrap(), &ms).unwrap();
    let b = empirical_moments(&Panel::from_series(&perturbed).unwrap(), &ms).unwrap();
    let bound = 5.0 / (t as f64).sqrt();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < bound, "{x} vs {y}");
    }
}

#[test]
fn report_invariants() {
    let p = problem(6, 300, 5, 30);
    let opts = SmmOptions {
        n_starts: 8,
        n_candidates: 2,
        ..SmmOptions::default()
    };
    let r = smm_estimate(&p, &opts).unwrap();
    let io = InferenceOptions {
        bootstrap_reps: 50,
        n_draws: 500,
        seed: 4,
        ..InferenceOptions::default()
    };
    let rep = infer(&p, &r, &io, Some(&r.theta_hat)).unwrap();
    assert_eq!(rep.j.mode, JMode::Simulated);
    assert_eq!(rep.j.df, 3);
    assert!(rep.j.stat >= 0.0);
    assert!((rep.j.stat - 300.0 * r.objective).abs() <= 1e-12 * rep.j.stat.max(1e-300));
    assert_eq!(rep.sigma, rep.sigma.transpose());
    assert_eq!(rep.omega, rep.omega.transpose());
    assert!(rep.omega.clone().symmetric_eigen().eigenvalues.iter().all(|v| *v >= -1e-12));
    for k in 0..4 {
        assert_eq!(rep.std_errors[k], (rep.omega[(k, k)] / 300.0).sqrt());
        assert!(rep.t_stats[k] == 0.0 || rep.t_stats[k].is_nan());
    }
    assert_eq!(rep, infer(&p, &r, &io, Some(&r.theta_hat)).unwrap());

    let two = smm_estimate(
        &p,
        &SmmOptions {
            two_step: true,
            bootstrap_reps: 50,
            ..opts
        },
    )
    .unwrap();
    let rep2 = infer(&p, &two, &io, None).unwrap();
    assert_eq!(rep2.j.mode, JMode::Chi2);
    assert_eq!(&rep2.sigma, two.sigma.as_ref().unwrap());
}
