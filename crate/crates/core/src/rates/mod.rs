//! Monte Carlo rate studies: sweep `n`, estimate, measure the error of
//! `K_n^{(s)} * p̂` against `p^{(s)}`, and fit the decay exponent.
//!
//! Task `i = n_index · R + replicate` draws from ChaCha stream `i` keyed by
//! the master seed, so every task is reproducible on its own and the
//! aggregation does not depend on scheduling.

mod config;
mod fit;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{InjectShape, ModelSection, StudyConfig, StudyMode, StudySection, TargetSection};
pub use fit::{fit_rate, upper_bound_check, BoundCheck, RateFit, Scale};

use crate::deconv::{derivative_estimate, predicted_exponent, select_bandwidth, smoothed_estimate, BandwidthPlan, Rate};
use crate::error::{Error, Result};
use crate::estimator::{fit_minimum_distance, oracle_inject, FitOptions, PerturbShape};
use crate::kernels::{build_kernel, scale, FlatTopKernel, MultiIndex};
use crate::manifest::Manifest;
use crate::noise::NoiseModel;
use crate::numerics::{fmt_f64, lp_norm, GridFunction, NormOrder};
use crate::rng::{task_rng, task_seed_label};
use crate::targets::{forward_density, sample_mixture, Forward, MixingDensity, SmoothnessClass};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub n: u64,
    pub replicate: usize,
    pub seed: u64,
    pub a_n: f64,
    pub b: f64,
    pub error: f64,
    pub deriv_order: u32,
    pub u: NormOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Skip {
    pub n: u64,
    pub replicate: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: u64,
    pub a_n: f64,
    pub median: f64,
    pub mean: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub records: Vec<Record>,
    pub skips: Vec<Skip>,
    pub summary: Vec<SummaryRow>,
    pub predicted: Rate,
    /// Fit of the medians against `a_n`; absent with fewer than 3 usable sizes.
    pub fit: Option<RateFit>,
    pub median_check: BoundCheck,
    pub mean_check: BoundCheck,
    pub pass: bool,
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl StudyResult {
    /// Fitted exponent on the scale of [`Rate::exponent`].
    pub fn fitted_exponent(&self) -> Option<f64> {
        self.fit.map(|f| match f.scale {
            Scale::Algebraic => f.slope,
            Scale::Logarithmic => -f.slope,
        })
    }
}

enum Outcome {
    Done(Record),
    Skipped(Skip),
}

struct Setup<'a> {
    cfg: &'a StudyConfig,
    h: NoiseModel,
    p: MixingDensity,
    class: SmoothnessClass,
    kernel: FlatTopKernel,
    s: MultiIndex,
    forward: Option<Forward>,
}

impl Setup<'_> {
    fn estimate_grid_pad(&self, b: f64) -> f64 {
        (self.cfg.study.pad * b).max(self.cfg.study.dx)
    }

    fn task(&self, n_index: usize, n: u64, replicate: usize) -> Result<Outcome> {
        let st = &self.cfg.study;
        let stream = (n_index * st.replicates + replicate) as u64;
        let seed = task_seed_label(st.seed, stream);
        let a_law = self.cfg.a_n(n);
        let plan = select_bandwidth(&self.h, a_law, &self.class, st.half_band, st.xi)?;
        let kn = scale(&self.kernel, plan.b)?;
        let grid = self.p.aligned_grid(st.dx, self.estimate_grid_pad(plan.b))?;

        let (p_hat, a_n) = match st.mode {
            StudyMode::OracleInject => {
                let fw = self.forward.as_ref().expect("oracle mode keeps the forward model");
                let omega = 0.5 * self.kernel.rho() * st.half_band / plan.b;
                let shape = match st.shape {
                    InjectShape::Bump => PerturbShape::BandlimitedBump { omega },
                    InjectShape::RandomPhase => PerturbShape::RandomPhase { omega_max: omega, seed },
                };
                match oracle_inject(fw, a_law, st.u, &shape) {
                    Ok(inj) => (inj.p_hat.embed_into(&grid)?, inj.a_n),
                    Err(Error::Domain { param, message }) if param == "a_n" => {
                        return Ok(Outcome::Skipped(Skip {
                            n,
                            replicate,
                            seed,
                            reason: message,
                        }));
                    }
                    Err(e) => return Err(e),
                }
            }
            StudyMode::FullPipeline => {
                let mut rng = task_rng(st.seed, stream);
                let x = sample_mixture(&self.p, &self.h, n as usize, &mut rng)?;
                let opts = FitOptions {
                    nodes: st.sieve_nodes,
                    band: st.sieve_band,
                    ..FitOptions::default()
                };
                let fit = fit_minimum_distance(&x, &self.h, self.p.support(), &opts, st.dx)?;
                (fit.mixing.sample_on(&grid), a_law)
            }
        };

        let est = if st.deriv_order == 0 {
            smoothed_estimate(&p_hat, &kn)?
        } else {
            derivative_estimate(&p_hat, &kn, &self.s)?
        };
        let order = st.deriv_order;
        let truth = GridFunction::sample(grid, |y| self.p.deriv_1d(y[0], order));
        let error = lp_norm(&est.sub(&truth)?, st.u)?;
        Ok(Outcome::Done(Record {
            n,
            replicate,
            seed,
            a_n,
            b: plan.b,
            error,
            deriv_order: order,
            u: st.u,
        }))
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Predicted rate for the configured model, target and derivative order.
pub fn study_rate(cfg: &StudyConfig) -> Result<Rate> {
    let h = cfg.noise()?;
    let class = cfg.mixing()?.smoothness();
    let s = MultiIndex::along_first(1, cfg.study.deriv_order);
    let zeta = BandwidthPlan::at_bandwidth(&h, 0.5, cfg.study.half_band, cfg.study.xi)?.zeta;
    predicted_exponent(&h, &class, &s, zeta)
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let start = Instant::now();
    let st = &cfg.study;
    let h = cfg.noise()?;
    let p = cfg.mixing()?;
    let class = p.smoothness();
    let s = MultiIndex::along_first(1, st.deriv_order);
    let predicted = study_rate(cfg)?;
    let kernel = build_kernel(1, st.half_band, st.rho, st.leg)?;
    let forward = match st.mode {
        StudyMode::OracleInject => Some(forward_density(&p, &h, st.dx)?),
        StudyMode::FullPipeline => None,
    };
    let setup = Setup {
        cfg,
        h,
        p,
        class,
        kernel,
        s,
        forward,
    };

    let tasks: Vec<(usize, u64, usize)> = st
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..st.replicates).map(move |r| (i, n, r)))
        .collect();
    let outcomes: Vec<Result<Outcome>> = tasks.par_iter().map(|&(i, n, r)| setup.task(i, n, r)).collect();

    let mut records = Vec::new();
    let mut skips = Vec::new();
    for o in outcomes {
        match o? {
            Outcome::Done(r) => records.push(r),
            Outcome::Skipped(s) => skips.push(s),
        }
    }

    let mut summary = Vec::new();
    for &n in &st.n_grid {
        let mut errs: Vec<f64> = records.iter().filter(|r| r.n == n).map(|r| r.error).collect();
        if errs.is_empty() {
            continue;
        }
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let med = median(&mut errs);
        let a_n = cfg.a_n(n);
        let bound = predicted.bound(a_n);
        summary.push(SummaryRow {
            n,
            a_n,
            median: med,
            mean,
            bound,
            ratio: med / bound,
        });
    }

    let scale = match predicted {
        Rate::Algebraic(_) => Scale::Algebraic,
        Rate::Logarithmic(_) => Scale::Logarithmic,
    };
    let pairs: Vec<(f64, f64)> = summary.iter().map(|r| (r.a_n, r.median)).collect();
    let fit = fit_rate(&pairs, scale).ok();
    let bounds: Vec<f64> = summary.iter().map(|r| r.bound).collect();
    let median_check = upper_bound_check(&summary.iter().map(|r| r.median).collect::<Vec<_>>(), &bounds);
    let mean_check = upper_bound_check(&summary.iter().map(|r| r.mean).collect::<Vec<_>>(), &bounds);
    let pass = summary.len() >= 3 && median_check.non_diverging && mean_check.non_diverging;

    Ok(StudyResult {
        config: cfg.clone(),
        records,
        skips,
        summary,
        predicted,
        fit,
        median_check,
        mean_check,
        pass,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

pub const RESULTS_HEADER: &str = "n,replicate,seed,a_n,b,error,deriv_order,u";
pub const SUMMARY_HEADER: &str = "n,median,mean,bound,ratio";

fn results_csv(res: &StudyResult) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in &res.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.replicate,
            r.seed,
            fmt_f64(r.a_n),
            fmt_f64(r.b),
            fmt_f64(r.error),
            r.deriv_order,
            r.u
        );
    }
    out
}

fn summary_csv(res: &StudyResult) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in &res.summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            fmt_f64(r.median),
            fmt_f64(r.mean),
            fmt_f64(r.bound),
            fmt_f64(r.ratio)
        );
    }
    out
}

fn skips_csv(res: &StudyResult) -> String {
    let mut out = String::from("n,replicate,seed,reason\n");
    for s in &res.skips {
        let _ = writeln!(out, "{},{},{},\"{}\"", s.n, s.replicate, s.seed, s.reason.replace('"', "'"));
    }
    out
}

fn plot_script(csv: &str, x: (usize, &str), ys: &[(usize, &str)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator \",\"");
    let _ = writeln!(out, "set key autotitle columnhead");
    let _ = writeln!(out, "set logscale xy");
    let _ = writeln!(out, "set xlabel \"{}\"", x.1);
    let plots: Vec<String> = ys
        .iter()
        .map(|(c, name)| format!("\"{csv}\" using {}:{c} title \"{name}\" with linespoints", x.0))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

#[derive(Serialize)]
struct FitFile<'a> {
    predicted: Rate,
    fit: Option<RateFit>,
    fitted_exponent: Option<f64>,
    median_check: &'a BoundCheck,
    mean_check: &'a BoundCheck,
    pass: bool,
    skipped: usize,
}

/// Writes the CSVs, plot scripts, `fit.json` and `manifest.json` into `dir`.
pub fn write_study(res: &StudyResult, dir: &Path, command: &str) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let fit = FitFile {
        predicted: res.predicted,
        fit: res.fit,
        fitted_exponent: res.fitted_exponent(),
        median_check: &res.median_check,
        mean_check: &res.mean_check,
        pass: res.pass,
        skipped: res.skips.len(),
    };
    let mut fit_json = serde_json::to_string_pretty(&fit)
        .map_err(|e| Error::config("fit", format!("cannot serialize fit: {e}")))?;
    fit_json.push('\n');
    let files: Vec<(&str, String)> = vec![
        ("results.csv", results_csv(res)),
        ("results.gp", plot_script("results.csv", (4, "a_n"), &[(6, "error")])),
        ("summary.csv", summary_csv(res)),
        (
            "summary.gp",
            plot_script("summary.csv", (1, "n"), &[(2, "median"), (3, "mean"), (4, "bound")]),
        ),
        ("skips.csv", skips_csv(res)),
        ("fit.json", fit_json),
    ];
    let mut names = Vec::new();
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
        names.push(name.to_string());
    }
    let mut manifest = Manifest::new(command, res.config.study.seed, &res.config)?;
    manifest.outputs = names.clone();
    manifest.write(dir)?;
    names.push("manifest.json".into());
    Ok(names)
}
