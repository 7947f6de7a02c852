use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lagfactor::factor::Method;
use lagfactor::simgen::{LoadingSupport, NoiseKind, Scenario, SimConfig, SubspaceMetric};
use lagfactor::Orientation;

#[derive(Debug, Parser)]
#[command(name = "lagfactor", version, about = "Factor models of high-dimensional time series via rank-revealing QR")]
pub struct Cli {
    /// Output directory. Falls back to $LAGFACTOR_OUT_DIR, then the current directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for Monte-Carlo runs; defaults to the number of cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo comparison of the estimators on a simulation scenario.
    Sim(SimArgs),
    /// Writes one simulated dataset as CSV files.
    Generate(GenerateArgs),
    /// Fits a factor model to a CSV time series.
    Fit(FitArgs),
    /// Model-order scan of a matrix read from CSV.
    Rankscan(RankscanArgs),
    /// Pivoted QR decomposition of a matrix read from CSV.
    Rrqr(RrqrArgs),
    /// Rolling one-step forecast evaluation on a CSV time series.
    Roll(RollArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    Sim1,
    Sim2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    Iid,
    Hurst,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SupportArg {
    Half,
    Strength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rrqr,
    Evd,
    Pca,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rrqr => Method::Rrqr,
            MethodArg::Evd => Method::Evd,
            MethodArg::Pca => Method::Pca,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Projector,
    ProjectorFrobenius,
    AlignedDirect,
}

impl From<MetricArg> for SubspaceMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Projector => SubspaceMetric::Projector,
            MetricArg::ProjectorFrobenius => SubspaceMetric::ProjectorFrobenius,
            MetricArg::AlignedDirect => SubspaceMetric::AlignedDirect,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgArg {
    Gs,
    Qrcp,
    Hybrid1,
    Hybrid2,
    Hybrid3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrientationArg {
    /// One series per row, time along the columns.
    Rows,
    /// One series per column, time down the rows.
    Columns,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::Rows => Orientation::RowsAreSeries,
            OrientationArg::Columns => Orientation::ColumnsAreSeries,
        }
    }
}

/// Simulation scenario flags shared by `sim` and `generate`.
#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    /// Number of series K.
    #[arg(long)]
    pub k: usize,
    /// Number of time steps N.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest lag m.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    /// Sim-1: zero the loading on the lower half of the series.
    #[arg(long)]
    pub half_support: bool,
    /// Sim-2 noise.
    #[arg(long, value_enum, default_value_t = NoiseArg::Iid)]
    pub noise: NoiseArg,
    /// Hurst exponent of the Sim-2 noise covariance.
    #[arg(long, default_value_t = 0.6)]
    pub w: f64,
    /// Multiplier of the Hurst covariance.
    #[arg(long, default_value_t = 0.1)]
    pub noise_scale: f64,
    /// Strength exponent of the second Sim-2 factor.
    #[arg(long, default_value_t = 0.5)]
    pub delta2: f64,
    /// Nonzero rows of the Sim-2 loadings.
    #[arg(long, value_enum, default_value_t = SupportArg::Half)]
    pub support: SupportArg,
}

impl ScenarioArgs {
    pub fn config(&self) -> SimConfig {
        let noise = match self.noise {
            NoiseArg::Iid => NoiseKind::IidIdentity,
            NoiseArg::Hurst => NoiseKind::Hurst { w: self.w, scale: self.noise_scale },
        };
        let base = match self.scenario {
            ScenarioArg::Sim1 => SimConfig::sim1(self.k, self.n, self.seed),
            ScenarioArg::Sim2 => SimConfig::sim2(self.k, self.n, self.seed, noise),
        };
        SimConfig {
            lag_hi: self.m as usize,
            half_support: self.half_support,
            delta2: self.delta2,
            support: match self.support {
                SupportArg::Half => LoadingSupport::Half,
                SupportArg::Strength => LoadingSupport::StrengthScaled,
            },
            ..base
        }
    }

    pub fn is_sim1(&self) -> bool {
        matches!(self.scenario, ScenarioArg::Sim1)
    }
}

pub fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::Sim1 => "sim1",
        Scenario::Sim2 => "sim2",
    }
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Comma-separated; defaults to rrqr,evd for sim1 and all three for sim2.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Vec<MethodArg>,
    /// Largest order considered by the RRQR and EVD scans.
    #[arg(long)]
    pub p_cap: Option<usize>,
    /// Largest order considered by the PCA criterion.
    #[arg(long)]
    pub p_max: Option<usize>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// AR order for an in-sample forecast error column.
    #[arg(long)]
    pub fe_ar: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

/// How a time-series CSV is laid out.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file of observations.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = OrientationArg::Rows)]
    pub orientation: OrientationArg,
    /// The first row is a header.
    #[arg(long)]
    pub header: bool,
    /// The file holds positive prices; fit their log-returns.
    #[arg(long)]
    pub prices: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Rrqr)]
    pub method: MethodArg,
    /// Smallest lag.
    #[arg(long, default_value_t = 1)]
    pub lag_lo: usize,
    /// Largest lag m.
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Number of factors; skips the order selection.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: Option<u64>,
    #[arg(long)]
    pub p_cap: Option<usize>,
    #[arg(long)]
    pub p_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RankscanArgs {
    /// CSV matrix, one row per line, no header.
    pub matrix: PathBuf,
    /// Sample length N entering the regularizer.
    #[arg(long)]
    pub n: usize,
    /// Largest assumed rank; defaults to min(K, columns) - 1 capped at 15.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub p_cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RrqrArgs {
    /// CSV matrix, one row per line, no header.
    pub matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgArg::Hybrid3)]
    pub alg: AlgArg,
    /// Assumed numerical rank (the number of pivot steps for qrcp).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,
}

#[derive(Debug, Args)]
pub struct RollArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Rrqr)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 500)]
    pub window: usize,
    /// Forecasts between refits.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// AR order of the factor forecasts.
    #[arg(long, default_value_t = 10)]
    pub ar: usize,
    /// Number of forecast samples at the end of the series.
    #[arg(long, default_value_t = 400)]
    pub eval_len: usize,
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long)]
    pub p_cap: Option<usize>,
    #[arg(long)]
    pub p_max: Option<usize>,
}
