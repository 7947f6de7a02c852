//! Eigen-decomposition (EVD) and PCA / information-criterion baselines.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::covariance::{center, lagged_product};
use crate::factor::{argmax, FactorModelFit, Method};
use crate::linalg::sym_eigen_desc;
use crate::rrqr::check_rank;
use crate::tsdata::{demean, TimeSeries};
use crate::{Error, Result};

/// `V(p)` at or below this fraction of `trace/K` counts as a perfect fit.
pub const PERFECT_FIT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvdSpectrum {
    /// `λ_1 ≥ … ≥ λ_K`.
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    /// `λ_i/λ_{i+1}` for `i = 1..K-1`.
    pub ratios: Vec<f64>,
}

/// `S = Σ_l Σ̃(l) Σ̃(l)ᵀ` over `lag_lo..=lag_hi`.
pub fn evd_s_matrix(ts: &TimeSeries, lag_lo: usize, lag_hi: usize) -> Result<DMatrix<f64>> {
    if lag_lo < 1 || lag_hi < lag_lo {
        return Err(Error::InvalidArgument(format!("lag range {lag_lo}..={lag_hi} must satisfy 1 <= lo <= hi")));
    }
    if lag_hi + 2 > ts.n() {
        return Err(Error::LagTooLarge { lag: lag_hi, n: ts.n() });
    }
    let centered = center(ts.values());
    let blocks: Vec<DMatrix<f64>> = (lag_lo..=lag_hi).map(|l| lagged_product(&centered, l)).collect();
    Ok(sum_of_outer_products(&blocks, ts.k()))
}

fn sum_of_outer_products(blocks: &[DMatrix<f64>], k: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(k, k);
    for b in blocks {
        s += b * b.transpose();
    }
    // products are symmetric only up to rounding
    (&s + s.transpose()) * 0.5
}

/// `λ_i/λ_{i+1}` with `0/0` read as 1.
fn eigen_ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// Eigenvalues at or below this fraction of `λ₁` count as zero in the ratios.
pub const EIGEN_FLOOR: f64 = 1e-12;

pub fn evd_spectrum(s: &DMatrix<f64>) -> EvdSpectrum {
    let (eigenvalues, eigenvectors) = sym_eigen_desc(s);
    let floor = EIGEN_FLOOR * eigenvalues.first().copied().unwrap_or(0.0).abs();
    let clip = |l: f64| if l <= floor { 0.0 } else { l };
    let ratios = eigenvalues.windows(2).map(|w| eigen_ratio(clip(w[0]), clip(w[1]))).collect();
    EvdSpectrum { eigenvalues, eigenvectors, ratios }
}

/// `argmax_{1 ≤ i ≤ p_cap} λ_i/λ_{i+1}`.
pub fn eigen_ratio_order(spectrum: &EvdSpectrum, p_cap: usize) -> Result<usize> {
    check_rank(p_cap, 1, spectrum.ratios.len(), "p_cap")?;
    Ok(argmax(&spectrum.ratios[..p_cap]) + 1)
}

fn top_vectors(u: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    u.columns(0, p).into_owned()
}

/// EVD estimator: `Q̂` = leading eigenvectors of `S`, `p̂` from the eigenvalue ratios.
pub fn fit_evd(
    ts: &TimeSeries,
    lag_lo: usize,
    lag_hi: usize,
    p_override: Option<usize>,
    p_cap: usize,
) -> Result<FactorModelFit> {
    let spectrum = evd_spectrum(&evd_s_matrix(ts, lag_lo, lag_hi)?);
    fit_evd_from_spectrum(ts, &spectrum, p_override, p_cap)
}

pub(crate) fn fit_evd_from_spectrum(
    ts: &TimeSeries,
    spectrum: &EvdSpectrum,
    p_override: Option<usize>,
    p_cap: usize,
) -> Result<FactorModelFit> {
    let p_hat = match p_override {
        Some(p) => {
            check_rank(p, 1, ts.k(), "factor count")?;
            p
        }
        None => eigen_ratio_order(spectrum, p_cap)?,
    };
    let q_hat = top_vectors(&spectrum.eigenvectors, p_hat);
    let factors = q_hat.transpose() * demean(ts).values();

    let mut diagnostics = BTreeMap::new();
    for (i, l) in spectrum.eigenvalues.iter().take(p_cap.max(p_hat) + 1).enumerate() {
        diagnostics.insert(format!("lambda_{:02}", i + 1), *l);
    }
    Ok(FactorModelFit { method: Method::Evd, p_hat, q_hat, factors, scan: None, diagnostics })
}

/// `p·((K+N)/(KN))·ln(KN/(K+N))`.
pub fn ic_penalty(k: usize, n: usize, p: usize) -> f64 {
    let (k, n) = (k as f64, n as f64);
    p as f64 * ((k + n) / (k * n)) * (k * n / (k + n)).ln()
}

/// `σ̂² = Σ_{i>p} λ_i`, a sum of the trailing eigenvalues.
pub fn sigma2_hat(eigenvalues: &[f64], p: usize) -> f64 {
    eigenvalues[p.min(eigenvalues.len())..].iter().map(|l| l.max(0.0)).sum()
}

/// `IC_p` for `p = 1..=p_max` from the eigenvalues of `Σ̃(0)`.
///
/// `V(p)` is the mean squared residual of the rank-`p` PCA fit, which
/// equals `(1/K) Σ_{i>p} λ_i`. A perfect fit yields `-∞`.
fn ic_values(eigenvalues: &[f64], n: usize, p_max: usize) -> Vec<f64> {
    let k = eigenvalues.len();
    let trace: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    (1..=p_max)
        .map(|p| {
            let v = sigma2_hat(eigenvalues, p) / k as f64;
            if v <= PERFECT_FIT_TOL * trace / k as f64 {
                f64::NEG_INFINITY
            } else {
                v.ln() + ic_penalty(k, n, p)
            }
        })
        .collect()
}

fn lag0_spectrum(ts: &TimeSeries) -> (Vec<f64>, DMatrix<f64>) {
    let centered = center(ts.values());
    sym_eigen_desc(&lagged_product(&centered, 0))
}

/// `IC_p = ln V(p) + p·((K+N)/(KN))·ln(KN/(K+N))`.
pub fn ic_p(ts: &TimeSeries, p: usize) -> Result<f64> {
    check_rank(p, 1, ts.k().min(ts.n()), "p")?;
    let (eigenvalues, _) = lag0_spectrum(ts);
    Ok(ic_values(&eigenvalues, ts.n(), p)[p - 1])
}

/// `IC_1 … IC_{p_max}`.
pub fn ic_curve(ts: &TimeSeries, p_max: usize) -> Result<Vec<f64>> {
    check_rank(p_max, 1, ts.k().min(ts.n()), "p_max")?;
    let (eigenvalues, _) = lag0_spectrum(ts);
    Ok(ic_values(&eigenvalues, ts.n(), p_max))
}

/// `max(1, min(K, N)/2)`.
pub fn default_p_max(k: usize, n: usize) -> usize {
    (k.min(n) / 2).max(1)
}

/// PCA estimator: `Q̂` = leading eigenvectors of `Σ̃(0)`, `p̂ = argmin IC_p`.
pub fn fit_pca(ts: &TimeSeries, p_max: usize, p_override: Option<usize>) -> Result<FactorModelFit> {
    check_rank(p_max, 1, ts.k().min(ts.n()), "p_max")?;
    let (eigenvalues, u) = lag0_spectrum(ts);
    let ic = ic_values(&eigenvalues, ts.n(), p_max);
    let p_hat = match p_override {
        Some(p) => {
            check_rank(p, 1, ts.k(), "factor count")?;
            p
        }
        None => {
            let mut best = 0;
            for (i, &v) in ic.iter().enumerate().skip(1) {
                if v < ic[best] {
                    best = i;
                }
            }
            best + 1
        }
    };
    let q_hat = top_vectors(&u, p_hat);
    let factors = q_hat.transpose() * demean(ts).values();

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("sigma2_hat".to_owned(), sigma2_hat(&eigenvalues, p_hat));
    if p_hat <= ic.len() {
        diagnostics.insert("ic_min".to_owned(), ic[p_hat - 1]);
    }
    Ok(FactorModelFit { method: Method::Pca, p_hat, q_hat, factors, scan: None, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::build_augmented;
    use crate::factor::fit_rrqr;
    use crate::linalg::orthonormality_defect;
    use proptest::prelude::*;

    struct Lcg(u64);

    impl Lcg {
        fn next(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    fn projector_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a * a.transpose() - b * b.transpose()).norm()
    }

    /// Noiseless observations of `p` AR(1) factors, `K = 6`.
    fn noiseless(p: usize, n: usize, seed: u64) -> TimeSeries {
        let mut rng = Lcg(seed);
        let h = DMatrix::from_fn(6, p, |_, _| rng.next());
        let mut x = DMatrix::zeros(p, n);
        for t in 1..n {
            for f in 0..p {
                x[(f, t)] = (0.9 - 0.1 * f as f64) * x[(f, t - 1)] + rng.next();
            }
        }
        TimeSeries::new(h * x, None).unwrap()
    }

    fn noisy(seed: u64, n: usize) -> TimeSeries {
        let mut rng = Lcg(seed);
        let v: Vec<f64> = (0..5 * n).map(|_| rng.next()).collect();
        TimeSeries::new(DMatrix::from_vec(5, n, v), None).unwrap()
    }

    #[test]
    fn identity_block_gives_identity() {
        let s = sum_of_outer_products(&[DMatrix::identity(3, 3)], 3);
        assert_eq!(s, DMatrix::identity(3, 3));
    }

    #[test]
    fn s_is_symmetric_psd_and_matches_augmented_gram() {
        for seed in 0..20 {
            let ts = noisy(seed, 40);
            let s = evd_s_matrix(&ts, 1, 5).unwrap();
            assert!((&s - s.transpose()).norm() <= 1e-12 * s.norm());
            let spec = evd_spectrum(&s);
            assert!(spec.eigenvalues.iter().all(|&l| l >= -1e-10 * spec.eigenvalues[0]));

            let m = build_augmented(&ts, 1, 5).unwrap().matrix;
            let gram = &m * m.transpose();
            assert!((&s - gram).norm() <= 1e-10 * s.norm());
        }
    }

    #[test]
    fn noiseless_spectrum_vanishes_past_rank() {
        let ts = noiseless(2, 300, 4);
        let spec = evd_spectrum(&evd_s_matrix(&ts, 1, 5).unwrap());
        for &l in &spec.eigenvalues[2..] {
            assert!(l.abs() <= 1e-10 * spec.eigenvalues[0]);
        }
    }

    #[test]
    fn ratio_order_on_diagonal_spectrum() {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![100.0, 50.0, 1.0, 0.9]));
        let spec = evd_spectrum(&s);
        assert_eq!(spec.ratios.len(), 3);
        assert!((spec.ratios[1] - 50.0).abs() < 1e-12);
        assert_eq!(eigen_ratio_order(&spec, 3).unwrap(), 2);
        assert!(eigen_ratio_order(&spec, 4).is_err());
    }

    #[test]
    fn evd_and_rrqr_agree_on_noiseless_data() {
        for p in 1..=3 {
            let ts = noiseless(p, 400, 10 + p as u64);
            let evd = fit_evd(&ts, 1, 5, None, 5).unwrap();
            let rrqr = fit_rrqr(&ts, 1, 5, None, 5).unwrap();
            assert_eq!(evd.p_hat, p);
            assert_eq!(rrqr.p_hat, p);
            assert!(projector_distance(&evd.q_hat, &rrqr.q_hat) <= 1e-8);
            assert!(orthonormality_defect(&evd.q_hat) <= 1e-10);
        }
    }

    #[test]
    fn penalty_formula() {
        assert!((ic_penalty(100, 100, 1) - 0.02 * 50f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn full_rank_projection_is_minus_infinity() {
        let ts = noisy(3, 30);
        assert_eq!(ic_p(&ts, 5).unwrap(), f64::NEG_INFINITY);
        assert!(ic_p(&ts, 2).unwrap().is_finite());
        assert!(ic_p(&ts, 0).is_err());
        assert!(ic_p(&ts, 6).is_err());
    }

    #[test]
    fn sigma2_is_a_sum() {
        assert_eq!(sigma2_hat(&[10.0, 8.0, 1.0, 1.0, 1.0], 2), 3.0);
    }

    #[test]
    fn pca_recovers_strong_factor() {
        let mut rng = Lcg(77);
        let (k, n) = (8, 500);
        let h = DMatrix::from_fn(k, 2, |_, _| rng.next());
        let q = crate::rrqr::gs_qr(&h).q.columns(0, 2).into_owned();
        let x = DMatrix::from_fn(2, n, |_, _| 100.0 * rng.next());
        let noise = DMatrix::from_fn(k, n, |_, _| 1e-3 * rng.next());
        let ts = TimeSeries::new(&h * x + noise, None).unwrap();
        let fit = fit_pca(&ts, 4, None).unwrap();
        assert_eq!(fit.p_hat, 2);
        assert!(projector_distance(&fit.q_hat, &q) <= 1e-3);
        assert!(fit.diagnostics["sigma2_hat"] > 0.0);

        let forced = fit_pca(&ts, 4, Some(3)).unwrap();
        assert_eq!(forced.q_hat.ncols(), 3);
    }

    #[test]
    fn default_p_max_halves() {
        assert_eq!(default_p_max(100, 200), 50);
        assert_eq!(default_p_max(1, 50), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn evd_order_is_scale_invariant(seed in 0u64..1000, scale in 1e-3..1e3f64) {
            let ts = noisy(seed, 60);
            let scaled = TimeSeries::new(ts.values() * scale, None).unwrap();
            let a = fit_evd(&ts, 1, 3, None, 4).unwrap();
            let b = fit_evd(&scaled, 1, 3, None, 4).unwrap();
            prop_assert_eq!(a.p_hat, b.p_hat);
        }
    }
}
