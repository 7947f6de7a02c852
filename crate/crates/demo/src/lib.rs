//! Browser bindings for three small experiments: Sim-1 ratio curves of the
//! RRQR and EVD estimators, the two-sided bounds of the hybrid pivoting
//! algorithms on a random matrix, and order selection on one Sim-2 draw.
//!
//! Every export returns a JSON string. The `*_json` functions are the same
//! computations callable from native Rust.

use lagfactor::factor::{default_p_cap, Method};
use lagfactor::simgen::{generate, monte_carlo, McOptions, NoiseKind, SimConfig, SimRng};
use lagfactor::{fit_evd, fit_pca, fit_rrqr, hybrid1, hybrid2, hybrid3, singular_values, Permutation, RrqrResult};
use nalgebra::DMatrix;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps a page request from freezing the tab.
pub const MAX_TRIALS: usize = 200;
pub const MAX_CELLS: usize = 200_000;

#[derive(Debug, Serialize, PartialEq)]
pub struct Curve {
    pub method: Method,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub peak: Option<usize>,
    pub hit_rate: f64,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct RatioCurves {
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub curves: Vec<Curve>,
}

fn check_size(k: usize, n: usize, trials: usize) -> Result<(), String> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must be in 1..={MAX_TRIALS}"));
    }
    if k.saturating_mul(n) > MAX_CELLS {
        return Err(format!("K*N must not exceed {MAX_CELLS}"));
    }
    Ok(())
}

/// Mean and spread of `r_i` (RRQR) and `λ_i/λ_{i+1}` (EVD) over Sim-1 trials.
pub fn ratio_curves_json(k: usize, n: usize, trials: usize, seed: u64) -> Result<String, String> {
    check_size(k, n, trials)?;
    let report = monte_carlo(&SimConfig::sim1(k, n, seed), &McOptions::new(trials, &[Method::Rrqr, Method::Evd]))
        .map_err(|e| e.to_string())?;
    let curves = report
        .summaries
        .iter()
        .map(|s| Curve {
            method: s.method,
            mean: s.ratio_mean.clone(),
            std: s.ratio_std.clone(),
            peak: s.ratio_peak(),
            hit_rate: s.hit_rate(1),
        })
        .collect();
    let out = RatioCurves { k, n, trials: report.summaries.first().map_or(0, |s| s.trials_ok), curves };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize, PartialEq)]
pub struct AlgorithmBounds {
    pub algorithm: &'static str,
    pub r11_min_sv: f64,
    pub r22_max_sv: f64,
    pub sweeps: usize,
    pub permutation: Vec<usize>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct BoundsReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// `σ_p/√(p(n−p+1))`, the floor for `σ_min(R₁₁)`.
    pub r11_floor: f64,
    /// `σ_{p+1}√((p+1)(n−p))`, the ceiling for `σ_max(R₂₂)`.
    pub r22_ceiling: f64,
    pub results: Vec<AlgorithmBounds>,
}

/// Gaussian `rows x cols` matrix whose columns are scaled by `decay^j`,
/// so a smaller `decay` gives a sharper singular-value drop.
fn test_matrix(rows: usize, cols: usize, decay: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = SimRng::new(seed);
    let mut a = DMatrix::from_fn(rows, cols, |_, _| rng.normal());
    for (j, mut c) in a.column_iter_mut().enumerate() {
        c *= decay.powi(j as i32);
    }
    a
}

/// Runs Hybrid-I, II and III at `rank` on a seeded random matrix.
pub fn rrqr_bounds_json(rows: usize, cols: usize, rank: usize, decay: f64, seed: u64) -> Result<String, String> {
    if rows < 2 || cols < 2 || rows * cols > 10_000 {
        return Err("matrix must be at least 2x2 and at most 10000 entries".into());
    }
    if rank < 1 || rank >= rows.min(cols) {
        return Err(format!("rank must be in 1..{}", rows.min(cols)));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err("decay must be in (0, 1]".into());
    }
    let a = test_matrix(rows, cols, decay, seed);
    let sv = singular_values(&a);
    let (p, n) = (rank as f64, cols as f64);
    let init = Permutation::identity(cols);
    let run = |name: &'static str, r: lagfactor::Result<RrqrResult>| -> Result<AlgorithmBounds, String> {
        let r = r.map_err(|e| e.to_string())?;
        Ok(AlgorithmBounds {
            algorithm: name,
            r11_min_sv: r.r11_min_sv,
            r22_max_sv: r.r22_max_sv,
            sweeps: r.sweeps,
            permutation: r.perm.order().to_vec(),
        })
    };
    let results = vec![
        run("hybrid-I", hybrid1(&a, rank, &init))?,
        run("hybrid-II", hybrid2(&a, rank, &init))?,
        run("hybrid-III", hybrid3(&a, rank))?,
    ];
    let out = BoundsReport {
        rows,
        cols,
        rank,
        r11_floor: sv[rank - 1] / (p * (n - p + 1.0)).sqrt(),
        r22_ceiling: sv[rank] * ((p + 1.0) * (n - p)).sqrt(),
        singular_values: sv,
        results,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize, PartialEq)]
pub struct OrderReport {
    pub k: usize,
    pub n: usize,
    pub true_p: usize,
    pub rrqr: usize,
    pub evd: usize,
    pub pca: usize,
    pub rrqr_ratios: Vec<f64>,
    pub evd_ratios: Vec<f64>,
}

/// Number of factors chosen by each method on one Sim-2 draw. `noise_scale`
/// of zero means identity noise, otherwise Hurst noise with exponent `w`.
pub fn sim2_order_json(k: usize, n: usize, noise_scale: f64, w: f64, seed: u64) -> Result<String, String> {
    check_size(k, n, 1)?;
    let noise = if noise_scale == 0.0 { NoiseKind::IidIdentity } else { NoiseKind::Hurst { w, scale: noise_scale } };
    let data = generate(&SimConfig::sim2(k, n, seed, noise)).map_err(|e| e.to_string())?;
    let cap = default_p_cap(k);
    let rrqr = fit_rrqr(&data.y, 1, 5, None, cap).map_err(|e| e.to_string())?;
    let evd = fit_evd(&data.y, 1, 5, None, cap).map_err(|e| e.to_string())?;
    let pca = fit_pca(&data.y, lagfactor::baselines::default_p_max(k, n), None).map_err(|e| e.to_string())?;
    let evd_ratios = lagfactor::baselines::evd_spectrum(&lagfactor::baselines::evd_s_matrix(&data.y, 1, 5).map_err(|e| e.to_string())?)
        .ratios
        .into_iter()
        .take(cap)
        .collect();
    let out = OrderReport {
        k,
        n,
        true_p: data.p,
        rrqr: rrqr.p_hat,
        evd: evd.p_hat,
        pca: pca.p_hat,
        rrqr_ratios: rrqr.scan.map(|s| s.ratios()).unwrap_or_default(),
        evd_ratios,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn ratio_curves(k: usize, n: usize, trials: usize, seed: u32) -> Result<String, JsError> {
    ratio_curves_json(k, n, trials, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn rrqr_bounds(rows: usize, cols: usize, rank: usize, decay: f64, seed: u32) -> Result<String, JsError> {
    rrqr_bounds_json(rows, cols, rank, decay, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sim2_order(k: usize, n: usize, noise_scale: f64, w: f64, seed: u32) -> Result<String, JsError> {
    sim2_order_json(k, n, noise_scale, w, seed.into()).map_err(|e| JsError::new(&e))
}
