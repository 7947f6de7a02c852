use nalgebra::DMatrix;

use super::*;
use crate::factor::Method;

fn lag_autocov(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    (lag..n).map(|t| (x[t] - m) * (x[t - lag] - m)).sum::<f64>() / (n - lag) as f64
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

#[test]
fn sim1_loading_values() {
    let h = sim1_loading(4, false);
    let want = [0.0, -2.0, 0.0, 2.0];
    for i in 0..4 {
        assert!((h[(i, 0)] - want[i]).abs() < 1e-12);
    }
    let half = sim1_loading(6, true);
    assert!(half.rows(3, 3).iter().all(|&v| v == 0.0));
    assert_eq!(half.rows(0, 3), sim1_loading(6, false).rows(0, 3));
}

#[test]
fn sim1_factor_variance() {
    let ds = gen_sim1(2, 100_000, 3).unwrap();
    let x = row(&ds.x, 0);
    let var = lag_autocov(&x, 0);
    let target = 4.0 / (1.0 - 0.81);
    assert!((var / target - 1.0).abs() < 0.05, "{var}");
    assert_eq!(ds.p, 1);
}

#[test]
fn generators_are_deterministic() {
    let a = gen_sim1(10, 50, 42).unwrap();
    let b = gen_sim1(10, 50, 42).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.y, gen_sim1(10, 50, 43).unwrap().y);

    let cfg = SimConfig::sim2(8, 40, 9, NoiseKind::Hurst { w: 0.6, scale: 0.1 });
    let a = gen_sim2(&cfg).unwrap();
    let b = gen_sim2(&cfg).unwrap();
    for (u, v) in a.y.values().iter().zip(b.y.values().iter()) {
        assert_eq!(u.to_bits(), v.to_bits());
    }
}

#[test]
fn datasets_reconstruct_exactly() {
    for ds in [
        gen_sim1(6, 30, 1).unwrap(),
        gen_sim2(&SimConfig::sim2(6, 30, 1, NoiseKind::IidIdentity)).unwrap(),
    ] {
        assert_eq!(ds.y.values(), &(&ds.h * &ds.x + &ds.noise));
    }
}

#[test]
fn sim2_second_loading_half_zero() {
    let ds = gen_sim2(&SimConfig::sim2(10, 20, 5, NoiseKind::IidIdentity)).unwrap();
    assert!(ds.h.column(1).rows(5, 5).iter().all(|&v| v == 0.0));
    assert!(ds.h.column(1).rows(0, 5).iter().all(|&v| v != 0.0 && v.abs() < 4.0));
    assert!(ds.h.column(0).iter().all(|&v| v != 0.0));
}

#[test]
fn sim2_ma_autocovariances() {
    let ds = gen_sim2(&SimConfig::sim2(4, 100_000, 17, NoiseKind::IidIdentity)).unwrap();
    let x1 = row(&ds.x, 0);
    let x2 = row(&ds.x, 1);
    assert!((lag_autocov(&x1, 1) - 0.5).abs() <= 0.025);
    assert!((lag_autocov(&x2, 2) - 0.5).abs() <= 0.025);
    assert!(lag_autocov(&x2, 1).abs() <= 0.025);
}

#[test]
fn sim2_iid_noise_is_white() {
    let ds = gen_sim2(&SimConfig::sim2(4, 100_000, 2, NoiseKind::IidIdentity)).unwrap();
    let c = &ds.noise * ds.noise.transpose() / 100_000.0;
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((c[(i, j)] - want).abs() <= 0.05);
        }
    }
}

#[test]
fn sim2_hurst_noise_covariance() {
    let (k, n) = (6, 100_000);
    let cfg = SimConfig::sim2(k, n, 8, NoiseKind::Hurst { w: 0.6, scale: 0.1 });
    let ds = gen_sim2(&cfg).unwrap();
    let c = &ds.noise * ds.noise.transpose() / n as f64;
    let want = hurst_cov(k, 0.6).unwrap() * 0.1;
    assert!((c - &want).amax() <= 0.05 * want.amax());
}

#[test]
fn config_validation() {
    assert!(gen_sim2(&SimConfig::sim2(7, 20, 0, NoiseKind::IidIdentity)).is_err());
    assert!(gen_sim2(&SimConfig::sim1(8, 20, 0)).is_err());
    let mut bad = SimConfig::sim2(8, 20, 0, NoiseKind::IidIdentity);
    bad.delta1 = 0.6;
    assert!(generate(&bad).is_err());
    assert!(generate(&SimConfig::sim2(8, 20, 0, NoiseKind::Hurst { w: 1.0, scale: 0.1 })).is_err());
    assert!(gen_sim1(1, 20, 0).is_err());
    assert!(gen_sim1(4, 9, 0).is_err());
}

#[test]
fn hurst_identities() {
    let bm = hurst_cov(7, 0.5).unwrap();
    for i in 0..7 {
        for j in 0..7 {
            assert_eq!(bm[(i, j)], (i.min(j) + 1) as f64);
        }
    }
    let s = hurst_cov(50, 0.6).unwrap();
    assert_eq!(s[(0, 0)], 1.0);
    assert_eq!(s, s.transpose());
    let (ev, _) = crate::linalg::sym_eigen_desc(&s);
    assert!(ev.iter().all(|&l| l >= -1e-8 * ev[0]));
    assert!(hurst_cov(3, 0.0).is_err());
}

#[test]
fn subspace_error_examples() {
    let q = DMatrix::from_column_slice(3, 1, &[0.6, 0.8, 0.0]);
    let neg = -&q;
    for mode in [SubspaceMetric::Projector, SubspaceMetric::ProjectorFrobenius, SubspaceMetric::AlignedDirect] {
        assert!(subspace_error(&q, &q, mode).unwrap() < 1e-15);
        assert!(subspace_error(&neg, &q, mode).unwrap() < 1e-15);
    }
    let a = DMatrix::from_fn(4, 2, |i, j| if i == j { 1.0 } else { 0.0 });
    let b = DMatrix::from_fn(4, 2, |i, j| if i == j + 2 { 1.0 } else { 0.0 });
    let fro = subspace_error(&a, &b, SubspaceMetric::ProjectorFrobenius).unwrap();
    assert!((fro - 2.0).abs() < 1e-14);
    assert!((subspace_error(&a, &b, SubspaceMetric::Projector).unwrap() - 1.0).abs() < 1e-12);
    assert!(subspace_error(&a, &b, SubspaceMetric::AlignedDirect).is_err());
    assert!(subspace_error(&a, &DMatrix::zeros(3, 2), SubspaceMetric::Projector).is_err());
}

/// `‖h‖² / K^{1−δ}` divided by the `U(−4, 4)` second moment.
fn strength_ratio(h: &DMatrix<f64>, col: usize, k: usize, delta: f64) -> f64 {
    h.column(col).norm_squared() / (k as f64).powf(1.0 - delta) / (16.0 / 3.0)
}

fn mean_strength_ratio(k: usize, support: LoadingSupport, col: usize, delta: f64) -> f64 {
    let total: f64 = (0..100)
        .map(|seed| {
            let cfg = SimConfig { support, ..SimConfig::sim2(k, 20, seed, NoiseKind::IidIdentity) };
            strength_ratio(&gen_sim2(&cfg).unwrap().h, col, k, delta)
        })
        .sum();
    total / 100.0
}

#[test]
fn loading_strengths_within_band_where_recipe_allows() {
    let band = 1.0 / 3.0..=3.0;
    for k in [20, 100, 400] {
        for (col, delta) in [(0, 0.0), (1, 0.5)] {
            let r = mean_strength_ratio(k, LoadingSupport::StrengthScaled, col, delta);
            assert!(band.contains(&r), "K={k} col {col}: {r}");
        }
    }
    for (col, delta) in [(0, 0.0), (1, 0.5)] {
        let r = mean_strength_ratio(20, LoadingSupport::Half, col, delta);
        assert!(band.contains(&r), "half K=20 col {col}: {r}");
    }
}

#[test]
fn half_support_outgrows_strength_band_at_large_k() {
    // K/2 nonzero rows give ‖h₂‖² ~ K, not K^{1/2}
    let r = mean_strength_ratio(400, LoadingSupport::Half, 1, 0.5);
    assert!((r - 10.0).abs() < 1.0, "{r}");
}

#[test]
fn monte_carlo_single_trial() {
    let report = monte_carlo(&SimConfig::sim1(10, 100, 5), &McOptions::new(1, &[Method::Rrqr, Method::Evd])).unwrap();
    assert_eq!(report.trials.len(), 1);
    assert_eq!(report.failures, 0);
    let s = report.summary(Method::Rrqr).unwrap();
    assert_eq!(s.loading_error_std, None);
    assert!(s.ratio_std.iter().all(|&v| v == 0.0));
    assert_eq!(s.ratio_mean.len(), 9);
    assert_eq!(report.metric, SubspaceMetric::AlignedDirect);
}

#[test]
fn monte_carlo_is_deterministic_and_complete() {
    let cfg = SimConfig::sim2(12, 120, 100, NoiseKind::IidIdentity);
    let mut opts = McOptions::new(6, &Method::ALL);
    opts.fe_ar_order = Some(4);
    let a = monte_carlo(&cfg, &opts).unwrap();
    let b = monte_carlo(&cfg, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.metric, SubspaceMetric::Projector);
    for (t, outcome) in a.trials.iter().enumerate() {
        assert_eq!(outcome.seed, 100 + t as u64);
        assert_eq!(outcome.results.len(), 3);
    }
    let pca = a.summary(Method::Pca).unwrap();
    assert!(pca.ratio_mean.is_empty());
    assert!(pca.fe_mean.unwrap() > 0.0);
    assert_eq!(pca.p_hat_histogram.values().sum::<usize>(), 6);

    let csv = ratio_curves_csv(&a);
    assert!(csv.starts_with("i,mean_r,std_r,method\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 11);
    assert_eq!(trials_csv(&a).lines().count(), 1 + 18);
}

#[test]
fn monte_carlo_rejects_empty_requests() {
    let cfg = SimConfig::sim1(10, 100, 5);
    assert!(monte_carlo(&cfg, &McOptions::new(0, &[Method::Rrqr])).is_err());
    assert!(monte_carlo(&cfg, &McOptions::new(3, &[])).is_err());
}

#[test]
fn sim1_rrqr_beats_evd_on_a_small_batch() {
    let report = monte_carlo(&SimConfig::sim1(20, 200, 0), &McOptions::new(20, &[Method::Rrqr, Method::Evd])).unwrap();
    let rr = report.summary(Method::Rrqr).unwrap();
    let ev = report.summary(Method::Evd).unwrap();
    assert!(rr.loading_error_mean < ev.loading_error_mean);
    assert!(rr.hit_rate(1) >= 0.9);
}
