//! Seeded generators for the two simulation designs, the Hurst noise
//! covariance, subspace-error metrics and the Monte-Carlo driver.

mod montecarlo;
mod rng;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{sym_eigen_desc, sym_sqrt};
use crate::rrqr::gs_qr;
use crate::tsdata::TimeSeries;
use crate::{Error, Result};

pub use montecarlo::{
    monte_carlo, ratio_curves_csv, trials_csv, McOptions, McReport, MethodSummary, MethodTrial, TrialOutcome,
};
pub use rng::SimRng;

/// Samples discarded before the Sim-1 factor is recorded.
pub const SIM1_BURN_IN: usize = 1000;
/// AR(1) coefficient of the Sim-1 factor.
pub const SIM1_AR: f64 = 0.9;
/// Standard deviation of both Sim-1 noises (variance 4).
pub const SIM1_NOISE_STD: f64 = 2.0;
/// Sim-2 loadings are drawn from `U(-SIM2_LOADING_BOUND, SIM2_LOADING_BOUND)`.
pub const SIM2_LOADING_BOUND: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Sim1,
    Sim2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NoiseKind {
    /// `N(0, I)`.
    IidIdentity,
    /// `N(0, scale·Σ_w)` with `Σ_w` from [`hurst_cov`].
    Hurst { w: f64, scale: f64 },
}

/// Which entries of a Sim-2 loading column are nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadingSupport {
    /// `h₁` on all rows, `h₂` on the first `K/2` rows.
    Half,
    /// Column `i` is nonzero on the first `round(K^{1-δ_i})` rows, so that
    /// `‖h_i‖²` grows like `K^{1-δ_i}` for every `K`.
    StrengthScaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub lag_lo: usize,
    pub lag_hi: usize,
    /// Sim-1 only: zero the loading below row `K/2`.
    pub half_support: bool,
    pub alpha1: f64,
    pub alpha2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub noise: NoiseKind,
    pub support: LoadingSupport,
}

impl SimConfig {
    pub fn sim1(k: usize, n: usize, seed: u64) -> Self {
        Self {
            scenario: Scenario::Sim1,
            k,
            n,
            seed,
            lag_lo: 1,
            lag_hi: crate::covariance::DEFAULT_LAG_HI,
            half_support: false,
            alpha1: 0.5,
            alpha2: 0.5,
            delta1: 0.0,
            delta2: 0.5,
            noise: NoiseKind::IidIdentity,
            support: LoadingSupport::Half,
        }
    }

    pub fn sim2(k: usize, n: usize, seed: u64, noise: NoiseKind) -> Self {
        Self { scenario: Scenario::Sim2, noise, ..Self::sim1(k, n, seed) }
    }

    /// The same configuration with another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag_lo < 1 || self.lag_hi < self.lag_lo || self.lag_hi + 2 > self.n {
            return Err(Error::InvalidArgument(format!(
                "lag range {}..={} does not fit N = {}",
                self.lag_lo, self.lag_hi, self.n
            )));
        }
        match self.scenario {
            Scenario::Sim1 => {
                if self.k < 2 || self.n < 10 {
                    return Err(Error::InvalidArgument("Sim-1 needs K >= 2 and N >= 10".into()));
                }
            }
            Scenario::Sim2 => {
                if self.k < 4 || self.k % 2 != 0 {
                    return Err(Error::InvalidArgument(format!("Sim-2 needs an even K >= 4, got {}", self.k)));
                }
                if self.n < 2 {
                    return Err(Error::InvalidArgument("Sim-2 needs N >= 2".into()));
                }
                if !(0.0 <= self.delta1 && self.delta1 < self.delta2 && self.delta2 <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "factor strengths must satisfy 0 <= delta1 < delta2 <= 1, got {} and {}",
                        self.delta1, self.delta2
                    )));
                }
                if let NoiseKind::Hurst { w, scale } = self.noise {
                    check_hurst(w)?;
                    if !(scale > 0.0 && scale.is_finite()) {
                        return Err(Error::InvalidArgument(format!("noise scale must be positive, got {scale}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `y = h x + noise`, with the pieces kept for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub y: TimeSeries,
    /// `K x p`.
    pub h: DMatrix<f64>,
    /// `p x N`.
    pub x: DMatrix<f64>,
    /// `K x N`.
    pub noise: DMatrix<f64>,
    pub p: usize,
}

impl SimDataset {
    /// Orthonormal basis of the column space of `h`, signed like `h`.
    pub fn q_true(&self) -> DMatrix<f64> {
        gs_qr(&self.h).q.columns(0, self.p).into_owned()
    }

    /// `h x` with each row's time mean removed, the target of a fit on demeaned data.
    pub fn common_component(&self) -> DMatrix<f64> {
        let mut c = &self.h * &self.x;
        for mut row in c.row_iter_mut() {
            let m = row.mean();
            row.add_scalar_mut(-m);
        }
        c
    }
}

/// Builds the dataset described by `config`.
pub fn generate(config: &SimConfig) -> Result<SimDataset> {
    config.validate()?;
    match config.scenario {
        Scenario::Sim1 => Ok(sim1(config.k, config.n, config.seed, config.half_support)),
        Scenario::Sim2 => sim2(config),
    }
}

/// Single AR(1) factor with loading `2cos(2πk/K)`, `k = 1..K`, and
/// Gaussian noises of variance 4.
pub fn gen_sim1(k: usize, n: usize, seed: u64) -> Result<SimDataset> {
    generate(&SimConfig::sim1(k, n, seed))
}

/// Sim-1 with the loading zeroed below row `K/2`.
pub fn gen_sim1_half(k: usize, n: usize, seed: u64) -> Result<SimDataset> {
    generate(&SimConfig { half_support: true, ..SimConfig::sim1(k, n, seed) })
}

/// Two MA factors, `U(-4, 4)` loadings and the configured noise.
pub fn gen_sim2(config: &SimConfig) -> Result<SimDataset> {
    if config.scenario != Scenario::Sim2 {
        return Err(Error::InvalidArgument("gen_sim2 needs a Sim-2 configuration".into()));
    }
    generate(config)
}

/// Sim-1 loading vector.
pub fn sim1_loading(k: usize, half_support: bool) -> DMatrix<f64> {
    DMatrix::from_fn(k, 1, |i, _| {
        if half_support && i >= k / 2 {
            0.0
        } else {
            2.0 * (2.0 * std::f64::consts::PI * (i + 1) as f64 / k as f64).cos()
        }
    })
}

// Draw order: η for burn-in and sample, then ε column by column.
fn sim1(k: usize, n: usize, seed: u64, half_support: bool) -> SimDataset {
    let mut rng = SimRng::new(seed);
    let h = sim1_loading(k, half_support);
    let total = SIM1_BURN_IN + n;
    let mut prev = 0.0;
    let mut x = DMatrix::zeros(1, n);
    for t in 0..total {
        let eta = SIM1_NOISE_STD * rng.normal();
        let cur = if t == 0 { 0.0 } else { SIM1_AR * prev + eta };
        if t >= SIM1_BURN_IN {
            x[(0, t - SIM1_BURN_IN)] = cur;
        }
        prev = cur;
    }
    let noise = fill_column_major(DMatrix::zeros(k, n), || SIM1_NOISE_STD * rng.normal());
    let y = &h * &x + &noise;
    SimDataset { y: TimeSeries::new(y, None).expect("finite by construction"), h, x, noise, p: 1 }
}

fn fill_column_major(mut m: DMatrix<f64>, mut draw: impl FnMut() -> f64) -> DMatrix<f64> {
    // nalgebra storage is column-major
    for v in m.iter_mut() {
        *v = draw();
    }
    m
}

fn support_len(k: usize, column: usize, config: &SimConfig) -> usize {
    match config.support {
        LoadingSupport::Half => {
            if column == 0 {
                k
            } else {
                k / 2
            }
        }
        LoadingSupport::StrengthScaled => {
            let delta = if column == 0 { config.delta1 } else { config.delta2 };
            ((k as f64).powf(1.0 - delta).round() as usize).clamp(1, k)
        }
    }
}

// Draw order: h₁, h₂ (support rows only), e₁ and e₂ (N + 2 each), then noise.
fn sim2(config: &SimConfig) -> Result<SimDataset> {
    let (k, n) = (config.k, config.n);
    let mut rng = SimRng::new(config.seed);
    let mut h = DMatrix::zeros(k, 2);
    for col in 0..2 {
        for i in 0..support_len(k, col, config) {
            h[(i, col)] = rng.uniform(-SIM2_LOADING_BOUND, SIM2_LOADING_BOUND);
        }
    }
    let e1: Vec<f64> = (0..n + 2).map(|_| rng.normal()).collect();
    let e2: Vec<f64> = (0..n + 2).map(|_| rng.normal()).collect();
    let x = DMatrix::from_fn(2, n, |f, t| {
        if f == 0 {
            e1[t + 2] + config.alpha1 * e1[t + 1]
        } else {
            e2[t + 2] + config.alpha2 * e2[t]
        }
    });
    let z = fill_column_major(DMatrix::zeros(k, n), || rng.normal());
    let noise = match config.noise {
        NoiseKind::IidIdentity => z,
        NoiseKind::Hurst { w, scale } => sym_sqrt(&(hurst_cov(k, w)? * scale)) * z,
    };
    let y = &h * &x + &noise;
    Ok(SimDataset { y: TimeSeries::new(y, None)?, h, x, noise, p: 2 })
}

fn check_hurst(w: f64) -> Result<()> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::InvalidArgument(format!("Hurst parameter must lie in (0, 1), got {w}")));
    }
    Ok(())
}

/// `σ_ij = ½(i^{2w} − |i−j|^{2w} + j^{2w})` with 1-based `i, j`.
pub fn hurst_cov(k: usize, w: f64) -> Result<DMatrix<f64>> {
    check_hurst(w)?;
    let e = 2.0 * w;
    Ok(DMatrix::from_fn(k, k, |i, j| {
        let (a, b) = ((i + 1) as f64, (j + 1) as f64);
        0.5 * (a.powf(e) + b.powf(e) - (a - b).abs().powf(e))
    }))
}

/// How [`subspace_error`] compares two bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceMetric {
    /// `‖Q̂Q̂ᵀ − QQᵀ‖₂`.
    Projector,
    /// `‖Q̂Q̂ᵀ − QQᵀ‖_F`.
    ProjectorFrobenius,
    /// `‖±q̂ − q‖₂` for single columns, sign chosen to agree with `q`.
    AlignedDirect,
}

/// Distance between the spans of two orthonormal-column matrices.
///
/// The projector forms accept different column counts.
pub fn subspace_error(q_hat: &DMatrix<f64>, q_true: &DMatrix<f64>, mode: SubspaceMetric) -> Result<f64> {
    if q_hat.nrows() != q_true.nrows() {
        return Err(Error::DimensionMismatch(format!("{} vs {} rows", q_hat.nrows(), q_true.nrows())));
    }
    match mode {
        SubspaceMetric::AlignedDirect => {
            if q_hat.ncols() != 1 || q_true.ncols() != 1 {
                return Err(Error::InvalidArgument("aligned-direct distance needs single columns".into()));
            }
            let a = q_hat.column(0);
            let b = q_true.column(0);
            let sign = if a.dot(&b) < 0.0 { -1.0 } else { 1.0 };
            Ok((a * sign - b).norm())
        }
        SubspaceMetric::Projector | SubspaceMetric::ProjectorFrobenius => {
            let d = q_hat * q_hat.transpose() - q_true * q_true.transpose();
            if mode == SubspaceMetric::ProjectorFrobenius {
                return Ok(d.norm());
            }
            let (ev, _) = sym_eigen_desc(&d);
            Ok(ev.iter().fold(0.0, |m, l| m.max(l.abs())))
        }
    }
}

#[cfg(test)]
mod tests;
