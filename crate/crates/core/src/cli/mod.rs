//! Command-line front end. Every subcommand writes its files and a
//! `manifest.json` into its own directory under the output root.
//!
//! Exit codes: 0 success, 1 usage, domain or config error, 2 numeric failure
//! (with `diagnostic.json` in the output root).

pub mod args;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

pub use args::{Cli, Command, OUT_DIR_ENV};
use args::*;

use crate::deconv::{
    bound_report, build_transfer, default_psi_grid, psi_star, psi_star_identity_error, select_bandwidth,
    smoothed_estimate, BandwidthPlan, BoundInputs, BoundReport,
};
use crate::error::{Error, Result};
use crate::estimator::{fit_minimum_distance, measure_quality, oracle_inject, FitOptions, PerturbShape};
use crate::kernels::{build_kernel, scale, verify_moments};
use crate::manifest::Manifest;
use crate::noise::NoiseModel;
use crate::numerics::{convolve, fmt_f64, lp_norm, write_grid_csv, GridFunction, NormOrder};
use crate::rates::{fit_rate, run_study, write_study, Scale, StudyConfig, RESULTS_HEADER};
use crate::rng::master_rng;
use crate::targets::{forward_density, sample_mixture, MixingDensity};

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let root = out_root(&cli);
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli, &root)),
            Err(e) => Err(Error::domain("threads", e.to_string())),
        },
        None => run(&cli, &root),
    };
    match result {
        Ok(dir) => {
            println!("outputs in {}", dir.display());
            0
        }
        Err(e) if e.is_numeric() => {
            let path = write_diagnostic(&root, &cli, &e);
            match path {
                Some(p) => eprintln!("numeric failure: {e}\ndiagnostics: {}", p.display()),
                None => eprintln!("numeric failure: {e}"),
            }
            2
        }
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            1
        }
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::Domain { param, message } => format!("--{}: {message}", param.replace('_', "-")),
        Error::Config { key, message } => format!("config key `{key}`: {message}"),
        other => other.to_string(),
    }
}

fn out_root(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("mixdecon-out"))
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Kernel(KernelCmd::Check(_)) => "kernel check",
        Command::Estimate(_) => "estimate",
        Command::Deconv(DeconvCmd::Demo(_)) => "deconv demo",
        Command::Bounds(BoundsCmd::Report(_)) => "bounds report",
        Command::Rates(RatesCmd::Run(_)) => "rates run",
        Command::Rates(RatesCmd::Fit(_)) => "rates fit",
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    command: &'a str,
    error: String,
    detail: String,
}

fn write_diagnostic(root: &Path, cli: &Cli, e: &Error) -> Option<PathBuf> {
    let diag = Diagnostic {
        command: command_name(&cli.command),
        error: e.to_string(),
        detail: format!("{e:?}"),
    };
    fs::create_dir_all(root).ok()?;
    let path = root.join("diagnostic.json");
    let text = serde_json::to_string_pretty(&diag).ok()?;
    fs::write(&path, text + "\n").ok()?;
    Some(path)
}

fn run(cli: &Cli, root: &Path) -> Result<PathBuf> {
    match &cli.command {
        Command::Kernel(KernelCmd::Check(a)) => kernel_check(cli, a, &root.join("kernel_check")),
        Command::Estimate(a) => estimate(cli, a, &root.join("estimate")),
        Command::Deconv(DeconvCmd::Demo(a)) => deconv_demo(cli, a, &root.join("deconv_demo")),
        Command::Bounds(BoundsCmd::Report(a)) => bounds_report(cli, a, &root.join("bounds_report")),
        Command::Rates(RatesCmd::Run(a)) => rates_run(cli, a, root),
        Command::Rates(RatesCmd::Fit(a)) => rates_fit(cli, a, &root.join("rates_fit")),
    }
}

/// Writes `files` and a manifest echoing `cli` into `dir`.
fn finish(cli: &Cli, dir: &Path, files: Vec<(&str, String)>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest::new(command_name(&cli.command), cli.seed.unwrap_or(0), cli)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
        manifest.outputs.push(name.to_string());
    }
    manifest.write(dir)?;
    Ok(dir.to_path_buf())
}

fn grid_csv(f: &GridFunction) -> Result<String> {
    let mut buf = Vec::new();
    write_grid_csv(f, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn json(v: &impl Serialize) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::config("output", e.to_string()))
}

fn parse_inputs(model: &str, t: &TargetArgs, d: usize) -> Result<(NoiseModel, MixingDensity)> {
    let h = NoiseModel::parse(model, d, "model")?;
    let p = MixingDensity::parse(&t.target, t.lo, t.hi, d, "target")?;
    if !(t.dx > 0.0) {
        return Err(Error::domain("dx", "spacing must be positive"));
    }
    Ok((h, p))
}

fn kernel_check(cli: &Cli, a: &KernelCheckArgs, dir: &Path) -> Result<PathBuf> {
    let k = build_kernel(a.d, a.half_band, a.rho, a.leg.unwrap_or(a.qmax + 3))?;
    let report = verify_moments(&k, a.qmax, a.tol);
    let mut csv = String::from("label,value,target,pass\n");
    for e in &report.entries {
        let _ = writeln!(csv, "{},{},{},{}", e.label, fmt_f64(e.value), fmt_f64(e.target), e.pass);
    }
    print!("{csv}");
    println!("overall pass = {}", report.passed());
    finish(cli, dir, vec![("kernel_check.csv", csv)])
}

#[derive(Serialize)]
struct EstimateSummary {
    n: usize,
    objective: f64,
    iterations: usize,
    a_n: f64,
    u: NormOrder,
    width: f64,
    centers: Vec<f64>,
    weights: Vec<f64>,
}

fn estimate(cli: &Cli, a: &EstimateArgs, dir: &Path) -> Result<PathBuf> {
    let (h, p) = parse_inputs(&a.model, &a.target, 1)?;
    let mut rng = master_rng(cli.seed.unwrap_or(0));
    let x = sample_mixture(&p, &h, a.n, &mut rng)?;
    let opts = FitOptions {
        nodes: a.nodes,
        band: a.band,
        ..FitOptions::default()
    };
    let fit = fit_minimum_distance(&x, &h, p.support(), &opts, a.target.dx)?;
    let hg = h.sample_on_grid(&[a.target.dx])?;
    let f_p = convolve(&p.sample_on(fit.p_hat.grid()), &hg)?;
    let quality = measure_quality(&fit.f_hat, &f_p, a.u)?;
    let summary = EstimateSummary {
        n: a.n,
        objective: fit.objective,
        iterations: fit.iterations,
        a_n: quality.a_n,
        u: a.u,
        width: fit.mixing.width,
        centers: fit.mixing.centers.clone(),
        weights: fit.mixing.weights.clone(),
    };
    println!("objective {:e}, iterations {}, a_n {:e}", fit.objective, fit.iterations, quality.a_n);
    finish(
        cli,
        dir,
        vec![
            ("p_hat.csv", grid_csv(&fit.p_hat)?),
            ("f_hat.csv", grid_csv(&fit.f_hat)?),
            ("fit.json", json(&summary)?),
        ],
    )
}

#[derive(Serialize)]
struct DemoSummary {
    plan: BandwidthPlan,
    a_n_target: f64,
    a_n: f64,
    regions: usize,
    psi_star_l2: f64,
    psi_star_l1: f64,
    identity_error: f64,
    error_sup: f64,
    error_l1: f64,
}

fn deconv_demo(cli: &Cli, a: &DemoArgs, dir: &Path) -> Result<PathBuf> {
    let (h, p) = parse_inputs(&a.model, &a.target, 1)?;
    let a_n = match (a.a_n, a.n) {
        (Some(v), _) => v,
        (None, Some(n)) => (n as f64).powf(-0.5),
        (None, None) => 1e-3,
    };
    let class = p.smoothness();
    let plan = match a.b {
        Some(b) => BandwidthPlan::at_bandwidth(&h, b, a.kernel.half_band, a.xi)?,
        None => select_bandwidth(&h, a_n, &class, a.kernel.half_band, a.xi)?,
    };
    let kernel = build_kernel(1, a.kernel.half_band, a.kernel.rho, a.kernel.leg)?;
    let kn = scale(&kernel, plan.b)?;
    let fw = forward_density(&p, &h, a.target.dx)?;
    let shape = PerturbShape::RandomPhase {
        omega_max: 0.5 * a.kernel.rho * a.kernel.half_band / plan.b,
        seed: cli.seed.unwrap_or(0),
    };
    let inj = oracle_inject(&fw, a_n, a.u, &shape)?;
    let transfer = build_transfer(&h, &plan)?;
    let ps = psi_star(&kn, &transfer, &default_psi_grid(&kn, cli.grid_nodes)?)?;
    let identity_error = psi_star_identity_error(&ps, &kn, &transfer)?;
    let grid = p.aligned_grid(a.target.dx, (40.0 * plan.b).max(a.target.dx))?;
    let est = smoothed_estimate(&inj.p_hat.embed_into(&grid)?, &kn)?;
    let diff = est.sub(&p.sample_on(&grid))?;
    let summary = DemoSummary {
        a_n_target: a_n,
        a_n: inj.a_n,
        regions: transfer.regions().len(),
        psi_star_l2: ps.l2,
        psi_star_l1: ps.l1(),
        identity_error,
        error_sup: diff.sup_norm(),
        error_l1: lp_norm(&diff, NormOrder::Finite(1.0))?,
        plan,
    };
    println!(
        "b = {}, error sup {:e}, L1 {:e}, identity {:e}",
        summary.plan.b, summary.error_sup, summary.error_l1, summary.identity_error
    );
    finish(
        cli,
        dir,
        vec![
            ("estimate.csv", grid_csv(&est)?),
            ("psi_star.csv", grid_csv(&ps.spatial)?),
            ("summary.json", json(&summary)?),
        ],
    )
}

/// Bound-report rows for each bandwidth, as printed by `bounds report`.
pub fn bounds_rows(a: &BoundsArgs) -> Result<Vec<BoundReport>> {
    let (h, p) = parse_inputs(&a.model, &a.target, 1)?;
    let kernel = build_kernel(1, a.kernel.half_band, a.kernel.rho, a.kernel.leg)?;
    let fw = forward_density(&p, &h, a.target.dx)?;
    let inj = oracle_inject(&fw, a.a_n, a.u, &PerturbShape::BandlimitedBump { omega: a.omega })?;
    let class = p.smoothness();
    let mut rows = Vec::new();
    for &b in &a.b {
        let mut plan = BandwidthPlan::at_bandwidth(&h, b, a.kernel.half_band, a.xi)?;
        if let Some(m) = a.m {
            plan = plan.with_m(&h, m)?;
        }
        plan = plan.scale_threshold(a.vn_factor)?;
        let transfer = build_transfer(&h, &plan)?;
        let kn = scale(&kernel, b)?;
        let inputs = BoundInputs {
            p_hat: &inj.p_hat,
            p: &fw.p,
            f_hat: &inj.f_hat,
            f_p: &fw.f,
        };
        rows.push(bound_report(inputs, &kn, &plan, &transfer, &class, a.u)?);
    }
    Ok(rows)
}

fn bounds_report(cli: &Cli, a: &BoundsArgs, dir: &Path) -> Result<PathBuf> {
    let rows = bounds_rows(a)?;
    let mut csv = format!("{}\n", BoundReport::CSV_HEADER);
    for r in &rows {
        let _ = writeln!(csv, "{}", r.csv_row());
    }
    print!("{csv}");
    finish(cli, dir, vec![("bounds_report.csv", csv)])
}

fn rates_run(cli: &Cli, a: &RatesRunArgs, root: &Path) -> Result<PathBuf> {
    let mut cfg = StudyConfig::load(&a.config).map_err(|e| match e {
        Error::Io(io) => Error::config("config", format!("{}: {io}", a.config.display())),
        other => other,
    })?;
    if let Some(seed) = cli.seed {
        cfg.study.seed = seed;
    }
    let res = run_study(&cfg)?;
    let dir = root.join(&cfg.study.output);
    write_study(&res, &dir, "rates run")?;
    println!(
        "predicted {:?}, fitted exponent {:?}, pass {}, skipped {}, {:.2}s",
        res.predicted,
        res.fitted_exponent(),
        res.pass,
        res.skips.len(),
        res.runtime_secs
    );
    Ok(dir)
}

#[derive(Serialize)]
struct FitSummary {
    points: Vec<(u64, f64, f64)>,
    fit: crate::rates::RateFit,
}

fn rates_fit(cli: &Cli, a: &RatesFitArgs, dir: &Path) -> Result<PathBuf> {
    let file = fs::File::open(&a.results)
        .map_err(|e| Error::config("results", format!("{}: {e}", a.results.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != RESULTS_HEADER {
        return Err(Error::config("results", format!("expected header `{RESULTS_HEADER}`")));
    }
    let mut groups: Vec<(u64, Vec<f64>, Vec<f64>)> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::config("results", format!("malformed row {}", i + 2));
        if f.len() != 8 {
            return Err(bad());
        }
        let n: u64 = f[0].parse().map_err(|_| bad())?;
        let a_n: f64 = f[3].parse().map_err(|_| bad())?;
        let err: f64 = f[5].parse().map_err(|_| bad())?;
        match groups.iter_mut().find(|g| g.0 == n) {
            Some(g) => {
                g.1.push(a_n);
                g.2.push(err);
            }
            None => groups.push((n, vec![a_n], vec![err])),
        }
    }
    let stat = |v: &mut Vec<f64>| match a.stat {
        Statistic::Mean => v.iter().sum::<f64>() / v.len() as f64,
        Statistic::Median => {
            v.sort_by(f64::total_cmp);
            let k = v.len();
            if k % 2 == 1 {
                v[k / 2]
            } else {
                0.5 * (v[k / 2 - 1] + v[k / 2])
            }
        }
    };
    let points: Vec<(u64, f64, f64)> = groups
        .iter_mut()
        .map(|(n, xs, es)| (*n, stat(xs), stat(es)))
        .collect();
    let scale = match a.scale {
        ScaleArg::Algebraic => Scale::Algebraic,
        ScaleArg::Logarithmic => Scale::Logarithmic,
    };
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.1, p.2)).collect();
    let fit = fit_rate(&pairs, scale)?;
    println!("slope {} ± {} over {} points", fit.slope, fit.stderr, fit.points);
    finish(cli, dir, vec![("fit.json", json(&FitSummary { points, fit })?)])
}
