//! Sample lag-autocovariances and the augmented matrix built from them.

use nalgebra::{DMatrix, DMatrixView};

use crate::tsdata::TimeSeries;
use crate::{Error, Result};

/// Upper end of the default lag range `1..=5`.
pub const DEFAULT_LAG_HI: usize = 5;

/// `Σ̃_yy(lag)`, a `K x K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCovariance {
    pub lag: usize,
    pub matrix: DMatrix<f64>,
}

/// `[Σ̃(a) Σ̃(a+1) … Σ̃(b)]`, a `K x (b-a+1)K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedCov {
    pub lag_lo: usize,
    pub lag_hi: usize,
    pub matrix: DMatrix<f64>,
    pub k: usize,
    /// Sample length the covariances were estimated from.
    pub n: usize,
}

impl AugmentedCov {
    pub fn num_lags(&self) -> usize {
        self.lag_hi - self.lag_lo + 1
    }

    /// Column block `j`, which is `Σ̃(lag_lo + j)`.
    pub fn block(&self, j: usize) -> DMatrixView<'_, f64> {
        self.matrix.columns(j * self.k, self.k)
    }
}

/// Centered sample autocovariance at `lag`, normalized by `1/(N - lag)`.
///
/// Both factors are centered with the full-sample mean.
pub fn sample_autocov(ts: &TimeSeries, lag: usize) -> Result<LagCovariance> {
    check_lag(lag, ts.n())?;
    let centered = center(ts.values());
    Ok(LagCovariance { lag, matrix: lagged_product(&centered, lag) })
}

pub fn build_augmented(ts: &TimeSeries, lag_lo: usize, lag_hi: usize) -> Result<AugmentedCov> {
    if lag_lo < 1 || lag_hi < lag_lo {
        return Err(Error::InvalidArgument(format!("lag range {lag_lo}..={lag_hi} must satisfy 1 <= lo <= hi")));
    }
    check_lag(lag_hi, ts.n())?;
    let k = ts.k();
    let centered = center(ts.values());
    let mut matrix = DMatrix::zeros(k, (lag_hi - lag_lo + 1) * k);
    for (j, lag) in (lag_lo..=lag_hi).enumerate() {
        matrix.columns_mut(j * k, k).copy_from(&lagged_product(&centered, lag));
    }
    Ok(AugmentedCov { lag_lo, lag_hi, matrix, k, n: ts.n() })
}

fn check_lag(lag: usize, n: usize) -> Result<()> {
    if lag + 2 > n {
        return Err(Error::LagTooLarge { lag, n });
    }
    Ok(())
}

pub(crate) fn center(values: &DMatrix<f64>) -> DMatrix<f64> {
    let n = values.ncols() as f64;
    let mean = values.column_sum() / n;
    let mut out = values.clone();
    for mut col in out.column_iter_mut() {
        col -= &mean;
    }
    out
}

/// `(1/(N-l)) Σ_n y_{n+l} y_nᵀ` over already-centered data.
pub(crate) fn lagged_product(centered: &DMatrix<f64>, lag: usize) -> DMatrix<f64> {
    let n = centered.ncols();
    let len = n - lag;
    let lead = centered.columns(lag, len);
    let base = centered.columns(0, len);
    (lead * base.transpose()) / len as f64
}
