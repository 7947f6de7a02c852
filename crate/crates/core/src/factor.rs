//! Number-of-factors scan and the RRQR loading estimator.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::covariance::{build_augmented, AugmentedCov};
use crate::par::map_indices;
use crate::rrqr::{check_rank, hybrid1, hybrid3_state, qr_cp_order};
use crate::tsdata::{demean, TimeSeries};
use crate::{Error, Result};

/// Largest rank the scan considers unless told otherwise.
pub const MAX_DEFAULT_P_CAP: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rrqr,
    Evd,
    Pca,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rrqr, Method::Evd, Method::Pca];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rrqr => "rrqr",
            Method::Evd => "evd",
            Method::Pca => "pca",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rrqr" => Ok(Method::Rrqr),
            "evd" => Ok(Method::Evd),
            "pca" => Ok(Method::Pca),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// One row of the scan: the decomposition at assumed rank `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderCandidate {
    pub i: usize,
    pub gamma_i: f64,
    pub gamma_next: f64,
    /// `(γ_i + ε)/(γ_{i+1} + ε)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelOrderScan {
    pub candidates: Vec<OrderCandidate>,
    pub epsilon: f64,
    pub p_hat: usize,
    pub p_cap: usize,
}

impl ModelOrderScan {
    pub fn ratios(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.ratio).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorModelFit {
    pub method: Method,
    pub p_hat: usize,
    /// `K x p̂`, orthonormal columns.
    #[serde(skip)]
    pub q_hat: DMatrix<f64>,
    /// `p̂ x N`, `Q̂ᵀ ỹ` for the demeaned observations `ỹ`.
    #[serde(skip)]
    pub factors: DMatrix<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ModelOrderScan>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl FactorModelFit {
    /// `Q̂ f̂`, the fitted common component.
    pub fn common_component(&self) -> DMatrix<f64> {
        &self.q_hat * &self.factors
    }
}

/// `min(K - 1, 15)`.
pub fn default_p_cap(k: usize) -> usize {
    k.saturating_sub(1).min(MAX_DEFAULT_P_CAP)
}

/// `(γ_i + ε)/(γ_{i+1} + ε)`, with `0/0` read as 1.
pub fn gamma_ratio(gamma_i: f64, gamma_next: f64, eps: f64) -> f64 {
    let (num, den) = (gamma_i + eps, gamma_next + eps);
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Rank scan on the augmented autocovariance matrix.
pub fn scan_model_order(m: &AugmentedCov, p_cap: usize) -> Result<ModelOrderScan> {
    scan_matrix(&m.matrix, p_cap, m.n)
}

/// Rank scan on an arbitrary `K x n` matrix estimated from `n_samples` observations.
///
/// For each `i` in `1..=p_cap` the matrix is decomposed with Hybrid-III at
/// assumed rank `i` and `γ_i, γ_{i+1}` are read from that decomposition.
/// All runs start from the same QR-CP ordering.
pub fn scan_matrix(a: &DMatrix<f64>, p_cap: usize, n_samples: usize) -> Result<ModelOrderScan> {
    let (k, n) = a.shape();
    check_rank(p_cap, 1, k.min(n).saturating_sub(1), "p_cap")?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let seed = qr_cp_order(a, p_cap + 1);
    let gammas = map_indices(p_cap, |idx| {
        let i = idx + 1;
        hybrid3_state(a, i, &seed).map(|(st, _)| (st.lead.diag(i - 1), st.lead.diag(i)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let epsilon = gammas[0].0 / ((k * n_samples) as f64).sqrt();
    let candidates: Vec<OrderCandidate> = gammas
        .iter()
        .enumerate()
        .map(|(idx, &(gamma_i, gamma_next))| OrderCandidate {
            i: idx + 1,
            gamma_i,
            gamma_next,
            ratio: gamma_ratio(gamma_i, gamma_next, epsilon),
        })
        .collect();
    let ratios: Vec<f64> = candidates.iter().map(|c| c.ratio).collect();
    Ok(ModelOrderScan { p_hat: argmax(&ratios) + 1, candidates, epsilon, p_cap })
}

/// The full RRQR estimator: scan (unless `p_override` is given), then a
/// Hybrid-I decomposition at `p̂` seeded by QR-CP, `Q̂` from its leading
/// orthonormal columns and `f̂_n = Q̂ᵀ ỹ_n`.
pub fn fit_rrqr(
    ts: &TimeSeries,
    lag_lo: usize,
    lag_hi: usize,
    p_override: Option<usize>,
    p_cap: usize,
) -> Result<FactorModelFit> {
    let m = build_augmented(ts, lag_lo, lag_hi)?;
    let (scan, p_hat) = match p_override {
        Some(p) => {
            check_rank(p, 1, ts.k(), "factor count")?;
            (None, p)
        }
        None => {
            let scan = scan_model_order(&m, p_cap)?;
            let p = scan.p_hat;
            (Some(scan), p)
        }
    };
    let res = hybrid1(&m.matrix, p_hat, &qr_cp_order(&m.matrix, p_hat))?;
    let q_hat = res.leading_q();
    let factors = q_hat.transpose() * demean(ts).values();

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("r11_min_sv".to_owned(), res.r11_min_sv);
    diagnostics.insert("r22_max_sv".to_owned(), res.r22_max_sv);
    diagnostics.insert("sweeps".to_owned(), res.sweeps as f64);
    if let Some(s) = &scan {
        diagnostics.insert("epsilon".to_owned(), s.epsilon);
    }
    Ok(FactorModelFit { method: Method::Rrqr, p_hat, q_hat, factors, scan, diagnostics })
}
