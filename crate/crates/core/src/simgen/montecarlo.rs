use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{generate, subspace_error, SimConfig, SimDataset, SubspaceMetric};
use crate::baselines::{default_p_max, evd_s_matrix, evd_spectrum, fit_evd_from_spectrum, fit_pca};
use crate::factor::{default_p_cap, fit_rrqr, FactorModelFit, Method};
use crate::forecast::{in_sample_fe, rmse_between, rmse_conventional};
use crate::par::map_indices;
use crate::tsdata::format_f64;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub trials: usize,
    pub methods: Vec<Method>,
    /// Scan cap for RRQR and EVD; `min(K-1, 15)` when absent.
    pub p_cap: Option<usize>,
    /// IC range for PCA; `min(K, N)/2` when absent.
    pub p_max: Option<usize>,
    /// Loading-error metric; aligned-direct for one factor and the
    /// spectral projector distance otherwise when absent.
    pub metric: Option<SubspaceMetric>,
    /// AR order for the in-sample forecast error; skipped when absent.
    pub fe_ar_order: Option<usize>,
}

impl McOptions {
    pub fn new(trials: usize, methods: &[Method]) -> Self {
        Self { trials, methods: methods.to_vec(), p_cap: None, p_max: None, metric: None, fe_ar_order: None }
    }
}

/// One method on one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodTrial {
    pub method: Method,
    pub p_hat: usize,
    /// Distance of the fit at the true `p` from the true loading space.
    pub loading_error: f64,
    /// Order-selection curve: `r_i` for RRQR, `λ_i/λ_{i+1}` for EVD, empty for PCA.
    pub ratios: Vec<f64>,
    /// `rmse` of the estimated model against the true common component.
    pub rmse: f64,
    pub rmse_conventional: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fe: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub results: Vec<MethodTrial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub trials_ok: usize,
    pub loading_error_mean: f64,
    /// Sample standard deviation; absent with fewer than two trials.
    pub loading_error_std: Option<f64>,
    /// Standard error of the mean; absent with fewer than two trials.
    pub loading_error_se: Option<f64>,
    pub p_hat_histogram: BTreeMap<usize, usize>,
    pub p_hat_mean: f64,
    pub p_hat_median: f64,
    pub ratio_mean: Vec<f64>,
    pub ratio_std: Vec<f64>,
    pub rmse_mean: f64,
    pub rmse_conventional_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fe_mean: Option<f64>,
}

impl MethodSummary {
    /// Fraction of trials with `p̂ = p`.
    pub fn hit_rate(&self, p: usize) -> f64 {
        *self.p_hat_histogram.get(&p).unwrap_or(&0) as f64 / self.trials_ok.max(1) as f64
    }

    /// 1-based index of the largest mean ratio.
    pub fn ratio_peak(&self) -> Option<usize> {
        (!self.ratio_mean.is_empty()).then(|| crate::factor::argmax(&self.ratio_mean) + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub config: SimConfig,
    pub options: McOptions,
    pub metric: SubspaceMetric,
    pub failures: usize,
    pub summaries: Vec<MethodSummary>,
    pub trials: Vec<TrialOutcome>,
}

impl McReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Runs `options.trials` independent trials with seeds `config.seed + t`.
///
/// Trials run in parallel when the `parallel` feature is on; the report is
/// the same either way. A failing trial is recorded and left out of the
/// summaries.
pub fn monte_carlo(config: &SimConfig, options: &McOptions) -> Result<McReport> {
    if options.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if options.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods selected".into()));
    }
    config.validate()?;
    let p_true = match config.scenario {
        super::Scenario::Sim1 => 1,
        super::Scenario::Sim2 => 2,
    };
    let metric = options.metric.unwrap_or(if p_true == 1 {
        SubspaceMetric::AlignedDirect
    } else {
        SubspaceMetric::Projector
    });

    let trials = map_indices(options.trials, |t| {
        let seed = config.seed.wrapping_add(t as u64);
        match run_trial(&config.with_seed(seed), options, metric) {
            Ok(results) => TrialOutcome { trial: t, seed, results, error: None },
            Err(e) => TrialOutcome { trial: t, seed, results: Vec::new(), error: Some(e.to_string()) },
        }
    });
    let failures = trials.iter().filter(|t| t.error.is_some()).count();
    let summaries = options.methods.iter().map(|&m| summarize(m, &trials)).collect();
    Ok(McReport { config: config.clone(), options: options.clone(), metric, failures, summaries, trials })
}

fn run_trial(config: &SimConfig, options: &McOptions, metric: SubspaceMetric) -> Result<Vec<MethodTrial>> {
    let ds = generate(config)?;
    let (k, n) = (config.k, config.n);
    let p_cap = options.p_cap.unwrap_or(default_p_cap(k));
    let p_max = options.p_max.unwrap_or(default_p_max(k, n));
    let (lo, hi) = (config.lag_lo, config.lag_hi);
    let q_true = ds.q_true();
    let truth = ds.common_component();

    options
        .methods
        .iter()
        .map(|&method| {
            let (fit, at_true, ratios) = match method {
                Method::Rrqr => {
                    let fit = fit_rrqr(&ds.y, lo, hi, None, p_cap)?;
                    let at_true = refit_if_needed(&fit, ds.p, || fit_rrqr(&ds.y, lo, hi, Some(ds.p), p_cap))?;
                    let ratios = fit.scan.as_ref().map(|s| s.ratios()).unwrap_or_default();
                    (fit, at_true, ratios)
                }
                Method::Evd => {
                    let spectrum = evd_spectrum(&evd_s_matrix(&ds.y, lo, hi)?);
                    let fit = fit_evd_from_spectrum(&ds.y, &spectrum, None, p_cap)?;
                    let at_true =
                        refit_if_needed(&fit, ds.p, || fit_evd_from_spectrum(&ds.y, &spectrum, Some(ds.p), p_cap))?;
                    (fit, at_true, spectrum.ratios[..p_cap].to_vec())
                }
                Method::Pca => {
                    let fit = fit_pca(&ds.y, p_max, None)?;
                    let at_true = refit_if_needed(&fit, ds.p, || fit_pca(&ds.y, p_max, Some(ds.p)))?;
                    (fit, at_true, Vec::new())
                }
            };
            score(method, &ds, &fit, &at_true, ratios, &q_true, &truth, metric, options.fe_ar_order)
        })
        .collect()
}

fn refit_if_needed(
    fit: &FactorModelFit,
    p: usize,
    refit: impl FnOnce() -> Result<FactorModelFit>,
) -> Result<FactorModelFit> {
    if fit.p_hat == p {
        Ok(fit.clone())
    } else {
        refit()
    }
}

#[allow(clippy::too_many_arguments)]
fn score(
    method: Method,
    ds: &SimDataset,
    fit: &FactorModelFit,
    at_true: &FactorModelFit,
    ratios: Vec<f64>,
    q_true: &nalgebra::DMatrix<f64>,
    truth: &nalgebra::DMatrix<f64>,
    metric: SubspaceMetric,
    fe_ar_order: Option<usize>,
) -> Result<MethodTrial> {
    let common = fit.common_component();
    Ok(MethodTrial {
        method,
        p_hat: fit.p_hat,
        loading_error: subspace_error(&at_true.q_hat, q_true, metric)?,
        ratios,
        rmse: rmse_between(&common, truth)?,
        rmse_conventional: rmse_conventional(&common, truth)?,
        fe: fe_ar_order.map(|q| in_sample_fe(fit, &ds.y, q)).transpose()?,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let m = mean(v);
    Some((v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        0.5 * (s[mid - 1] + s[mid])
    }
}

fn summarize(method: Method, trials: &[TrialOutcome]) -> MethodSummary {
    let rows: Vec<&MethodTrial> =
        trials.iter().flat_map(|t| t.results.iter()).filter(|r| r.method == method).collect();
    let pick = |f: fn(&MethodTrial) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let errors = pick(|r| r.loading_error);
    let p_hats = pick(|r| r.p_hat as f64);
    let mut hist = BTreeMap::new();
    for r in &rows {
        *hist.entry(r.p_hat).or_insert(0) += 1;
    }

    let width = rows.first().map_or(0, |r| r.ratios.len());
    let mut ratio_mean = Vec::with_capacity(width);
    let mut ratio_std = Vec::with_capacity(width);
    for i in 0..width {
        let col: Vec<f64> = rows.iter().map(|r| r.ratios[i]).collect();
        ratio_mean.push(mean(&col));
        ratio_std.push(sample_std(&col).unwrap_or(0.0));
    }
    let fes: Vec<f64> = rows.iter().filter_map(|r| r.fe).collect();

    if rows.is_empty() {
        return MethodSummary {
            method,
            trials_ok: 0,
            loading_error_mean: f64::NAN,
            loading_error_std: None,
            loading_error_se: None,
            p_hat_histogram: hist,
            p_hat_mean: f64::NAN,
            p_hat_median: f64::NAN,
            ratio_mean,
            ratio_std,
            rmse_mean: f64::NAN,
            rmse_conventional_mean: f64::NAN,
            fe_mean: None,
        };
    }
    let std = sample_std(&errors);
    MethodSummary {
        method,
        trials_ok: rows.len(),
        loading_error_mean: mean(&errors),
        loading_error_std: std,
        loading_error_se: std.map(|s| s / (rows.len() as f64).sqrt()),
        p_hat_histogram: hist,
        p_hat_mean: mean(&p_hats),
        p_hat_median: median(&p_hats),
        ratio_mean,
        ratio_std,
        rmse_mean: mean(&pick(|r| r.rmse)),
        rmse_conventional_mean: mean(&pick(|r| r.rmse_conventional)),
        fe_mean: (!fes.is_empty()).then(|| mean(&fes)),
    }
}

/// Columns `i, mean_r, std_r, method`.
pub fn ratio_curves_csv(report: &McReport) -> String {
    let mut out = String::from("i,mean_r,std_r,method\n");
    for s in &report.summaries {
        for (i, (m, sd)) in s.ratio_mean.iter().zip(&s.ratio_std).enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i + 1, format_f64(*m), format_f64(*sd), s.method);
        }
    }
    out
}

/// One row per trial and method.
pub fn trials_csv(report: &McReport) -> String {
    let mut out = String::from("trial,seed,method,p_hat,loading_error,rmse,rmse_conventional,fe\n");
    for t in &report.trials {
        for r in &t.results {
            let fe = r.fe.map(format_f64).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                t.trial,
                t.seed,
                r.method,
                r.p_hat,
                format_f64(r.loading_error),
                format_f64(r.rmse),
                format_f64(r.rmse_conventional),
                fe
            );
        }
    }
    out
}
