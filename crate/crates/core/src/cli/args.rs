use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::numerics::NormOrder;

pub const OUT_DIR_ENV: &str = "MIXDECON_OUT_DIR";

#[derive(Debug, Parser, Serialize)]
#[command(name = "mixdecon", version, about = "Plug-in deconvolution of mixing densities")]
pub struct Cli {
    /// Master seed; overrides the seed of a study config when given.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Nodes per axis of the filter grids.
    #[arg(long, global = true, default_value_t = 1 << 14)]
    pub grid_nodes: usize,
    /// Output root; defaults to $MIXDECON_OUT_DIR, then ./mixdecon-out.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Flat-top kernel checks.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Sieve minimum-distance fit to simulated draws.
    Estimate(EstimateArgs),
    /// Deconvolution demos.
    #[command(subcommand)]
    Deconv(DeconvCmd),
    /// Error-bound terms.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Rate studies.
    #[command(subcommand)]
    Rates(RatesCmd),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum KernelCmd {
    /// Moment and integrability report.
    Check(KernelCheckArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum DeconvCmd {
    /// Oracle-injected estimate, plan and filter on one configuration.
    Demo(DemoArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum BoundsCmd {
    /// One CSV row of bound terms per bandwidth.
    Report(BoundsArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum RatesCmd {
    /// Runs a study from a config file.
    Run(RatesRunArgs),
    /// Refits a results CSV.
    Fit(RatesFitArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct KernelCheckArgs {
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Kernel half-band.
    #[arg(long = "M", default_value_t = 2.0)]
    pub half_band: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 6)]
    pub qmax: u32,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Leg order of the kernel; defaults to qmax + 3.
    #[arg(long)]
    pub leg: Option<u32>,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct TargetArgs {
    #[arg(long, default_value = "spline(qtilde=2)")]
    pub target: String,
    #[arg(long, default_value_t = -1.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    /// Spatial grid spacing.
    #[arg(long, default_value_t = 0.01)]
    pub dx: f64,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct EstimateArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long)]
    pub n: usize,
    /// Sieve atoms.
    #[arg(long, default_value_t = 40)]
    pub nodes: usize,
    /// Frequency window of the fit criterion.
    #[arg(long, default_value_t = 2.0)]
    pub band: f64,
    #[arg(long, default_value = "2")]
    pub u: NormOrder,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long = "M", default_value_t = 2.0)]
    pub half_band: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 4)]
    pub leg: u32,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct DemoArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Injected `‖f̂ − f_p‖_u`.
    #[arg(long, conflicts_with = "n")]
    pub a_n: Option<f64>,
    /// Sample size; sets `a_n = n^{-1/2}`.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value = "inf")]
    pub u: NormOrder,
    #[arg(long, default_value_t = 0.5)]
    pub xi: f64,
    /// Bandwidth; defaults to the plan for `a_n`.
    #[arg(long)]
    pub b: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct BoundsArgs {
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0.5)]
    pub xi: f64,
    /// Bandwidths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub b: Vec<f64>,
    /// Band exponent in `M_n = 2M / b^{2m}`; defaults to the class value.
    #[arg(long)]
    pub m: Option<f64>,
    /// Multiplier on the threshold `v_n`.
    #[arg(long, default_value_t = 1.0)]
    pub vn_factor: f64,
    /// Injected `‖f̂ − f_p‖_u`.
    #[arg(long, default_value_t = 1e-4)]
    pub a_n: f64,
    #[arg(long, default_value = "2")]
    pub u: NormOrder,
    /// Frequency of the injected perturbation.
    #[arg(long, default_value_t = 5.0)]
    pub omega: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RatesRunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Algebraic,
    Logarithmic,
}

#[derive(Debug, Args, Serialize)]
pub struct RatesFitArgs {
    /// A `results.csv` written by `rates run`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, value_enum)]
    pub scale: ScaleArg,
    #[arg(long, value_enum, default_value_t = Statistic::Median)]
    pub stat: Statistic,
}
