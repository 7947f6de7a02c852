use std::fmt::Write as _;

use lagfactor::baselines::{default_p_max, fit_evd, fit_pca};
use lagfactor::factor::{default_p_cap, fit_rrqr, scan_matrix, FactorModelFit, Method, ModelOrderScan};
use lagfactor::forecast::{rolling_eval, ForecastReport, RollingConfig};
use lagfactor::simgen::{generate, monte_carlo, ratio_curves_csv, trials_csv, McOptions};
use lagfactor::tsdata::{format_f64, load_csv, load_matrix_csv, log_returns, matrix_to_csv};
use lagfactor::{gs_qr, hybrid1, hybrid2, hybrid3, qr_cp, singular_values, Permutation, QrFactors, TimeSeries};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::args::{scenario_name, AlgArg, FitArgs, GenerateArgs, InputArgs, MethodArg, RankscanArgs, RollArgs, RrqrArgs, SimArgs};
use crate::report::{Output, RunManifest};
use crate::CliError;

pub fn sim(args: &SimArgs, out: &mut Output) -> Result<String, CliError> {
    let config = args.scenario.config();
    let methods: Vec<Method> = if args.methods.is_empty() {
        if args.scenario.is_sim1() {
            vec![Method::Rrqr, Method::Evd]
        } else {
            Method::ALL.to_vec()
        }
    } else {
        args.methods.iter().map(|&m| m.into()).collect()
    };
    let options = McOptions {
        p_cap: args.p_cap,
        p_max: args.p_max,
        metric: args.metric.map(Into::into),
        fe_ar_order: args.fe_ar,
        ..McOptions::new(args.trials as usize, &methods)
    };

    let mut manifest = RunManifest::start("sim");
    manifest.extend(&config);
    manifest.set("trials", options.trials);
    manifest.set("methods", &options.methods);
    manifest.set("p_cap", options.p_cap);
    manifest.set("p_max", options.p_max);
    manifest.set("metric", options.metric);
    manifest.set("fe_ar_order", options.fe_ar_order);
    manifest.seed = Some(config.seed);

    let report = monte_carlo(&config, &options)?;
    out.text("ratio_curves.csv", &ratio_curves_csv(&report))?;
    out.text("trials.csv", &trials_csv(&report))?;
    out.report("sim_report.json", &mut manifest, &report)?;

    let mut msg = format!("{} K={} N={} trials={}", scenario_name(config.scenario), config.k, config.n, options.trials);
    for s in &report.summaries {
        write!(msg, "\n  {:<5} loading error {:.6}  mean p_hat {:.2}", s.method, s.loading_error_mean, s.p_hat_mean).unwrap();
    }
    if report.failures > 0 {
        write!(msg, "\n  {} trials failed", report.failures).unwrap();
    }
    Ok(msg)
}

#[derive(Serialize)]
struct Generated {
    k: usize,
    n: usize,
    p: usize,
}

pub fn generate_data(args: &GenerateArgs, out: &mut Output) -> Result<String, CliError> {
    let config = args.scenario.config();
    let mut manifest = RunManifest::start("generate");
    manifest.extend(&config);
    manifest.seed = Some(config.seed);

    let data = generate(&config)?;
    out.text("data.csv", &matrix_to_csv(data.y.values()))?;
    out.text("loading.csv", &matrix_to_csv(&data.h))?;
    out.text("factors.csv", &matrix_to_csv(&data.x))?;
    out.report("generate.json", &mut manifest, &Generated { k: data.y.k(), n: data.y.n(), p: data.p })?;
    Ok(format!("{} series x {} steps, {} factors", data.y.k(), data.y.n(), data.p))
}

fn load_input(input: &InputArgs, manifest: &mut RunManifest) -> Result<TimeSeries, CliError> {
    manifest.set("input", input.input.display().to_string());
    manifest.set("orientation", lagfactor::Orientation::from(input.orientation));
    manifest.set("header", input.header);
    manifest.set("prices", input.prices);
    let ts = load_csv(&input.input, input.orientation.into(), input.header)?;
    if input.prices {
        Ok(log_returns(&ts)?)
    } else {
        Ok(ts)
    }
}

fn scan_table(scan: &ModelOrderScan) -> String {
    let mut s = String::from("i,gamma_i,gamma_next,ratio,selected\n");
    for c in &scan.candidates {
        writeln!(
            s,
            "{},{},{},{},{}",
            c.i,
            format_f64(c.gamma_i),
            format_f64(c.gamma_next),
            format_f64(c.ratio),
            u8::from(c.i == scan.p_hat)
        )
        .unwrap();
    }
    s
}

#[derive(Serialize)]
struct FitResult<'a> {
    k: usize,
    n: usize,
    fit: &'a FactorModelFit,
}

pub fn fit(args: &FitArgs, out: &mut Output) -> Result<String, CliError> {
    let mut manifest = RunManifest::start("fit");
    let ts = load_input(&args.input, &mut manifest)?;
    let method: Method = args.method.into();
    let p = args.p.map(|p| p as usize);
    let p_cap = args.p_cap.unwrap_or(default_p_cap(ts.k()));
    let p_max = args.p_max.unwrap_or(default_p_max(ts.k(), ts.n()));
    manifest.set("method", method);
    manifest.set("p", p);
    if method == Method::Pca {
        manifest.set("p_max", p_max);
    } else {
        manifest.set("lag_lo", args.lag_lo);
        manifest.set("lag_hi", args.m);
        manifest.set("p_cap", p_cap);
    }

    let fit = match args.method {
        MethodArg::Rrqr => fit_rrqr(&ts, args.lag_lo, args.m, p, p_cap)?,
        MethodArg::Evd => fit_evd(&ts, args.lag_lo, args.m, p, p_cap)?,
        MethodArg::Pca => fit_pca(&ts, p_max, p)?,
    };
    out.text("q_hat.csv", &matrix_to_csv(&fit.q_hat))?;
    out.text("factors.csv", &matrix_to_csv(&fit.factors))?;
    if let Some(scan) = &fit.scan {
        out.text("scan.csv", &scan_table(scan))?;
    }
    out.report("fit.json", &mut manifest, &FitResult { k: ts.k(), n: ts.n(), fit: &fit })?;
    Ok(format!("{method}: p_hat = {}", fit.p_hat))
}

pub fn rankscan(args: &RankscanArgs, out: &mut Output) -> Result<String, CliError> {
    let mut manifest = RunManifest::start("rankscan");
    manifest.set("matrix", args.matrix.display().to_string());
    let a = load_matrix_csv(&args.matrix)?;
    let p_cap = match args.p_cap {
        Some(p) => p as usize,
        None => (a.nrows().min(a.ncols()).saturating_sub(1)).clamp(1, lagfactor::factor::MAX_DEFAULT_P_CAP),
    };
    manifest.set("n", args.n);
    manifest.set("p_cap", p_cap);

    let scan = scan_matrix(&a, p_cap, args.n)?;
    out.text("rankscan.csv", &scan_table(&scan))?;
    out.report("rankscan.json", &mut manifest, &scan)?;
    Ok(format!("p_hat = {} (epsilon {:.6e})", scan.p_hat, scan.epsilon))
}

#[derive(Serialize)]
struct RrqrSummary {
    algorithm: &'static str,
    rank: usize,
    permutation: Vec<usize>,
    diag: Vec<f64>,
    singular_values: Vec<f64>,
    r11_min_sv: f64,
    r22_max_sv: f64,
    r22_max_abs: f64,
    /// `σ_p / √(p(n−p+1))`.
    r11_lower_bound: f64,
    /// `σ_{p+1} √((p+1)(n−p))`, absent when `p` is the full rank.
    r22_upper_bound: Option<f64>,
    r11_slack: f64,
    r22_slack: Option<f64>,
    reconstruction_residual: f64,
}

fn alg_name(alg: AlgArg) -> &'static str {
    match alg {
        AlgArg::Gs => "gs",
        AlgArg::Qrcp => "qrcp",
        AlgArg::Hybrid1 => "hybrid1",
        AlgArg::Hybrid2 => "hybrid2",
        AlgArg::Hybrid3 => "hybrid3",
    }
}

fn block_sv(r: &DMatrix<f64>, from: usize, rows: usize, cols: usize) -> Vec<f64> {
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    singular_values(&r.view((from, from), (rows, cols)).into_owned())
}

pub fn rrqr(args: &RrqrArgs, out: &mut Output) -> Result<String, CliError> {
    let mut manifest = RunManifest::start("rrqr");
    manifest.set("matrix", args.matrix.display().to_string());
    manifest.set("algorithm", alg_name(args.alg));
    manifest.set("rank", args.rank);
    let a = load_matrix_csv(&args.matrix)?;
    let (k, n) = a.shape();
    let p = args.rank as usize;
    if p > k.min(n) {
        return Err(lagfactor::Error::InvalidArgument(format!("rank {p} exceeds min(K, n) = {}", k.min(n))).into());
    }
    let identity = Permutation::identity(n);

    let (perm, factors): (Permutation, QrFactors) = match args.alg {
        AlgArg::Gs => (identity, gs_qr(&a)),
        AlgArg::Qrcp => {
            let r = qr_cp(&a, p)?;
            (r.perm, r.factors)
        }
        AlgArg::Hybrid1 => {
            let r = hybrid1(&a, p, &identity)?;
            (r.perm, r.factors)
        }
        AlgArg::Hybrid2 => {
            let r = hybrid2(&a, p, &identity)?;
            (r.perm, r.factors)
        }
        AlgArg::Hybrid3 => {
            let r = hybrid3(&a, p)?;
            (r.perm, r.factors)
        }
    };

    let sv = singular_values(&a);
    let rr = &factors.r;
    let t = rr.nrows();
    let r11 = block_sv(rr, 0, p, p);
    let r22 = block_sv(rr, p, t - p, n - p);
    let r11_min_sv = r11.last().copied().unwrap_or(0.0);
    let r22_max_sv = r22.first().copied().unwrap_or(0.0);
    let r22_max_abs = if p < t { rr.view((p, p), (t - p, n - p)).amax() } else { 0.0 };
    let (pf, nf) = (p as f64, n as f64);
    let r11_lower_bound = sv[p - 1] / (pf * (nf - pf + 1.0)).sqrt();
    let r22_upper_bound = sv.get(p).map(|s| s * ((pf + 1.0) * (nf - pf)).sqrt());
    let residual = factors.residual(&perm.apply_columns(&a)) / a.norm().max(f64::MIN_POSITIVE);

    let summary = RrqrSummary {
        algorithm: alg_name(args.alg),
        rank: p,
        permutation: perm.order().to_vec(),
        diag: factors.diag.clone(),
        singular_values: sv,
        r11_min_sv,
        r22_max_sv,
        r22_max_abs,
        r11_lower_bound,
        r22_upper_bound,
        r11_slack: r11_min_sv - r11_lower_bound,
        r22_slack: r22_upper_bound.map(|b| b - r22_max_sv),
        reconstruction_residual: residual,
    };

    let perm_csv: String = perm.order().iter().map(|i| format!("{i}\n")).collect();
    out.text("rrqr_perm.csv", &perm_csv)?;
    out.text("rrqr_r.csv", &matrix_to_csv(&factors.r))?;
    out.text("rrqr_q.csv", &matrix_to_csv(&factors.q))?;
    out.report("rrqr.json", &mut manifest, &summary)?;
    Ok(format!(
        "{} rank {p}: sigma_min(R11) = {:.6e}, sigma_max(R22) = {:.6e}",
        summary.algorithm, r11_min_sv, r22_max_sv
    ))
}

pub fn roll(args: &RollArgs, out: &mut Output) -> Result<String, CliError> {
    let mut manifest = RunManifest::start("roll");
    let ts = load_input(&args.input, &mut manifest)?;
    let cfg = RollingConfig {
        window: args.window,
        refit_stride: args.stride,
        ar_order: args.ar,
        eval_len: args.eval_len,
        lag_hi: args.m,
        p_cap: args.p_cap,
        p_max: args.p_max,
        ..RollingConfig::new(args.method.into())
    };
    manifest.extend(&cfg);

    let report: ForecastReport = rolling_eval(&ts, &cfg, None)?;
    let mut windows = String::from("start,forecast_start,p_hat,rmse\n");
    for w in &report.per_window {
        writeln!(windows, "{},{},{},{}", w.start, w.forecast_start, w.p_hat, format_f64(w.rmse)).unwrap();
    }
    out.text("roll_windows.csv", &windows)?;
    out.report("roll.json", &mut manifest, &report)?;
    Ok(format!("{}: FE = {:.6e}, mean p_hat = {:.2}", cfg.method, report.fe, report.p_hat_mean))
}
