//! AR models for extracted factors, one-step forecasts, error metrics and
//! the rolling-window evaluation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::baselines::{default_p_max, fit_evd, fit_pca};
use crate::factor::{default_p_cap, fit_rrqr, FactorModelFit, Method};
use crate::tsdata::{demean, TimeSeries};
use crate::{Error, Result};

/// Zero-mean autoregression `x_t = Σ_j φ_j x_{t-j} + e_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub order: usize,
    pub coeffs: Vec<f64>,
    pub noise_var: f64,
}

impl ArModel {
    /// Model that always predicts zero.
    pub fn zero(order: usize) -> Self {
        Self { order, coeffs: vec![0.0; order], noise_var: 0.0 }
    }

    /// One-step prediction from `history`, most recent value last.
    pub fn predict_next(&self, history: &[f64]) -> Result<f64> {
        if history.len() < self.order {
            return Err(Error::InsufficientData(format!(
                "AR({}) needs {} past values, got {}",
                self.order,
                self.order,
                history.len()
            )));
        }
        let last = history.len() - 1;
        Ok(self.coeffs.iter().enumerate().map(|(j, c)| c * history[last - j]).sum())
    }
}

/// Yule-Walker estimate of an AR(`order`) model, solved by Levinson-Durbin.
///
/// The series is demeaned and the autocovariances use the biased `1/N`
/// normalization, which keeps the Toeplitz system positive definite.
pub fn yule_walker(series: &[f64], order: usize) -> Result<ArModel> {
    let n = series.len();
    if order < 1 || 2 * order > n {
        return Err(Error::InvalidArgument(format!("AR order {order} outside 1..={} for {n} samples", n / 2)));
    }
    let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        return Err(Error::ZeroVariance);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let acov: Vec<f64> =
        (0..=order).map(|h| (h..n).map(|t| x[t] * x[t - h]).sum::<f64>() / n as f64).collect();
    if acov[0] <= 0.0 {
        return Err(Error::ZeroVariance);
    }

    let mut phi = vec![0.0; order];
    let mut err = acov[0];
    for k in 1..=order {
        let mut num = acov[k];
        for j in 1..k {
            num -= phi[j - 1] * acov[k - j];
        }
        let lambda = num / err;
        let prev = phi.clone();
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - lambda * prev[k - j - 1];
        }
        phi[k - 1] = lambda;
        err *= 1.0 - lambda * lambda;
    }
    Ok(ArModel { order, coeffs: phi, noise_var: err.max(0.0) })
}

/// One-step forecast of factors and observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub factors: DVector<f64>,
    pub observation: DVector<f64>,
    pub warning: Option<String>,
}

/// Forecasts each factor with its own AR model and maps back through `Q̂`.
///
/// `history` is `p̂ x T`, most recent column last.
pub fn forecast_one_step(fit: &FactorModelFit, ar: &[ArModel], history: &DMatrix<f64>) -> Result<Forecast> {
    let k = fit.q_hat.nrows();
    if fit.p_hat == 0 {
        return Ok(Forecast {
            factors: DVector::zeros(0),
            observation: DVector::zeros(k),
            warning: Some("model has no factors; forecasting zero".to_owned()),
        });
    }
    if ar.len() != fit.p_hat || history.nrows() != fit.p_hat {
        return Err(Error::DimensionMismatch(format!(
            "{} factors but {} AR models and {} history rows",
            fit.p_hat,
            ar.len(),
            history.nrows()
        )));
    }
    let mut factors = DVector::zeros(fit.p_hat);
    for (f, model) in ar.iter().enumerate() {
        let row: Vec<f64> = history.row(f).iter().copied().collect();
        factors[f] = model.predict_next(&row)?;
    }
    let observation = &fit.q_hat * &factors;
    Ok(Forecast { factors, observation, warning: None })
}

fn check_same_shape(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// `(Σ_n ‖a_n − b_n‖₂ / (KN))^{1/2}` with the column norms left unsquared.
pub fn rmse_between(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(estimate, truth)?;
    let (k, n) = estimate.shape();
    if n == 0 {
        return Err(Error::EmptyWindow);
    }
    let total: f64 = (estimate - truth).column_iter().map(|c| c.norm()).sum();
    Ok((total / (k * n) as f64).sqrt())
}

/// `(Σ_n ‖a_n − b_n‖₂² / (KN))^{1/2}`.
pub fn rmse_conventional(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(estimate, truth)?;
    let (k, n) = estimate.shape();
    if n == 0 {
        return Err(Error::EmptyWindow);
    }
    Ok(((estimate - truth).norm_squared() / (k * n) as f64).sqrt())
}

/// [`rmse_between`] of `Q̂ f̂` against `H x`.
pub fn rmse(fit: &FactorModelFit, truth_loading: &DMatrix<f64>, truth_factors: &DMatrix<f64>) -> Result<f64> {
    if truth_loading.ncols() != truth_factors.nrows() {
        return Err(Error::DimensionMismatch("loading columns must match factor rows".into()));
    }
    rmse_between(&fit.common_component(), &(truth_loading * truth_factors))
}

/// `(1/T) Σ_t K^{-1/2} ‖ŷ_t − y_t‖₂`.
pub fn forecast_error(predictions: &DMatrix<f64>, actuals: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(predictions, actuals)?;
    let (k, t) = predictions.shape();
    if t == 0 {
        return Err(Error::EmptyWindow);
    }
    let total: f64 = (predictions - actuals).column_iter().map(|c| c.norm()).sum();
    Ok(total / (t as f64 * (k as f64).sqrt()))
}

/// Per-factor AR models fitted to the rows of `factors`.
pub fn fit_factor_ar(factors: &DMatrix<f64>, order: usize) -> Result<Vec<ArModel>> {
    factors
        .row_iter()
        .map(|row| yule_walker(&row.iter().copied().collect::<Vec<_>>(), order))
        .collect()
}

/// In-sample one-step forecast error of a fitted model: AR models on the
/// full factor series, then a forecast of every `ỹ_n` with `n ≥ order` from
/// the factors before it.
pub fn in_sample_fe(fit: &FactorModelFit, ts: &TimeSeries, ar_order: usize) -> Result<f64> {
    let y = demean(ts).into_values();
    let f = fit.q_hat.transpose() * &y;
    let ar = fit_factor_ar(&f, ar_order)?;
    let n = y.ncols();
    let mut pred = DMatrix::zeros(y.nrows(), n - ar_order);
    for t in ar_order..n {
        let fc = forecast_one_step(fit, &ar, &f.columns(0, t).into_owned())?;
        pred.set_column(t - ar_order, &fc.observation);
    }
    forecast_error(&pred, &y.columns(ar_order, n - ar_order).into_owned())
}

/// Parameters of the rolling evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub method: Method,
    pub window: usize,
    pub refit_stride: usize,
    pub ar_order: usize,
    pub eval_len: usize,
    pub lag_lo: usize,
    pub lag_hi: usize,
    /// Scan cap for RRQR and EVD; `min(K-1, 15)` when absent.
    pub p_cap: Option<usize>,
    /// IC search range for PCA; `min(K, window)/2` when absent.
    pub p_max: Option<usize>,
}

impl RollingConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            window: 500,
            refit_stride: 10,
            ar_order: 10,
            eval_len: 400,
            lag_lo: 1,
            lag_hi: crate::covariance::DEFAULT_LAG_HI,
            p_cap: None,
            p_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowResult {
    /// First column of the fitting window.
    pub start: usize,
    /// First forecast column.
    pub forecast_start: usize,
    pub p_hat: usize,
    /// In-window reconstruction residual `(1/(KW) Σ ‖ỹ_n − Q̂ f̂_n‖²)^{1/2}`.
    pub rmse: f64,
    /// [`rmse_between`] against the true common component, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastReport {
    pub config: RollingConfig,
    pub p_hat_mean: f64,
    pub rmse_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_truth_mean: Option<f64>,
    pub fe: f64,
    pub per_window: Vec<WindowResult>,
}

/// Fits `method` to `ts` with the scan settings of `cfg`.
pub fn fit_method(ts: &TimeSeries, cfg: &RollingConfig) -> Result<FactorModelFit> {
    match cfg.method {
        Method::Rrqr => fit_rrqr(ts, cfg.lag_lo, cfg.lag_hi, None, cfg.p_cap.unwrap_or(default_p_cap(ts.k()))),
        Method::Evd => fit_evd(ts, cfg.lag_lo, cfg.lag_hi, None, cfg.p_cap.unwrap_or(default_p_cap(ts.k()))),
        Method::Pca => fit_pca(ts, cfg.p_max.unwrap_or(default_p_max(ts.k(), ts.n())), None),
    }
}

/// Rolling one-step evaluation over the last `eval_len` samples.
///
/// The data are demeaned once. Forecasts start at `N − eval_len`; before
/// each block of `refit_stride` forecasts the model is refitted on the
/// preceding `window` samples, AR models are fitted to that window's factor
/// history, and each forecast then uses the observed values up to the
/// previous sample. `truth` is the true common component `H x`, if known.
pub fn rolling_eval(ts: &TimeSeries, cfg: &RollingConfig, truth: Option<&DMatrix<f64>>) -> Result<ForecastReport> {
    let (k, n) = (ts.k(), ts.n());
    if cfg.window < 2 || cfg.refit_stride == 0 || cfg.eval_len == 0 {
        return Err(Error::InvalidArgument("window must be at least 2 and stride, eval length positive".into()));
    }
    if n < cfg.window + cfg.eval_len {
        return Err(Error::InsufficientData(format!(
            "{n} samples cannot hold a {}-sample window plus {} evaluation samples",
            cfg.window, cfg.eval_len
        )));
    }
    if let Some(t) = truth {
        if t.shape() != (k, n) {
            return Err(Error::DimensionMismatch(format!("truth is {:?}, data is {:?}", t.shape(), (k, n))));
        }
    }
    let y = demean(ts).into_values();
    let t0 = n - cfg.eval_len;

    let mut predictions = DMatrix::zeros(k, cfg.eval_len);
    let mut per_window = Vec::new();
    let mut block_start = t0;
    while block_start < n {
        let start = block_start - cfg.window;
        let block_end = (block_start + cfg.refit_stride).min(n);
        let window_data = y.columns(start, cfg.window).into_owned();
        let fit = fit_method(&TimeSeries::new(window_data.clone(), None)?, cfg)?;

        let f = fit.q_hat.transpose() * y.columns(start, block_end - start);
        let ar = fit_factor_ar(&f.columns(0, cfg.window).into_owned(), cfg.ar_order)?;
        for t in block_start..block_end {
            let fc = forecast_one_step(&fit, &ar, &f.columns(0, t - start).into_owned())?;
            predictions.set_column(t - t0, &fc.observation);
        }

        let recon = &fit.q_hat * f.columns(0, cfg.window);
        let rmse = rmse_conventional(&recon, &window_data)?;
        let rmse_truth = match truth {
            Some(t) => Some(rmse_between(&recon, &t.columns(start, cfg.window).into_owned())?),
            None => None,
        };
        per_window.push(WindowResult { start, forecast_start: block_start, p_hat: fit.p_hat, rmse, rmse_truth });
        block_start = block_end;
    }

    let windows = per_window.len() as f64;
    let p_hat_mean = per_window.iter().map(|w| w.p_hat as f64).sum::<f64>() / windows;
    let rmse_mean = per_window.iter().map(|w| w.rmse).sum::<f64>() / windows;
    let rmse_truth_mean =
        truth.map(|_| per_window.iter().filter_map(|w| w.rmse_truth).sum::<f64>() / windows);
    let fe = forecast_error(&predictions, &y.columns(t0, cfg.eval_len).into_owned())?;
    Ok(ForecastReport { config: cfg.clone(), p_hat_mean, rmse_mean, rmse_truth_mean, fe, per_window })
}
