use std::fs;
use std::path::Path;
use std::process::Command;

use mixdecon::cli::dispatch;

const STUDY: &str = r#"
[model]
spec = "exponential(theta=1)"

[target]
spec = "spline(qtilde=2)"
lo = -1.0
hi = 1.0

[study]
mode = "oracle_inject"
n_grid = [1024, 8192, 65536]
replicates = 2
u = "2"
seed = 4
output = "expo"
"#;

fn run(out: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["mixdecon", "--out-dir", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    dispatch(argv)
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn kernel_check_rows_pass() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(dir.path(), &["kernel", "check", "--d", "1", "--M", "2", "--rho", "0.5", "--qmax", "6", "--tol", "1e-3"]);
    assert_eq!(code, 0);
    let csv = read(dir.path().join("kernel_check/kernel_check.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows.len() >= 8);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{csv}");
    assert!(dir.path().join("kernel_check/manifest.json").exists());
}

#[test]
fn bounds_report_row_for_sinc() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(dir.path(), &["bounds", "report", "--model", "uniform(m=1)", "--xi", "0.5", "--b", "0.05"]);
    assert_eq!(code, 0);
    let csv = read(dir.path().join("bounds_report/bounds_report.csv"));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "c_lhs").unwrap();
    let c: f64 = row[col].parse().unwrap();
    assert!(c > 0.0, "c_lhs = {c}");
}

#[test]
fn rates_run_is_byte_identical_and_refits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    fs::write(&cfg, STUDY).unwrap();
    let outs: Vec<_> = ["a", "b"].iter().map(|s| dir.path().join(s)).collect();
    for (o, threads) in outs.iter().zip(["1", "3"]) {
        assert_eq!(run(o, &["--threads", threads, "rates", "run", "--config", cfg.to_str().unwrap()]), 0);
    }
    for f in ["results.csv", "summary.csv", "skips.csv", "fit.json", "results.gp", "summary.gp", "manifest.json"] {
        let x = fs::read(outs[0].join("expo").join(f)).unwrap();
        let y = fs::read(outs[1].join("expo").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let summary = read(outs[0].join("expo/summary.csv"));
    assert_eq!(summary.lines().next().unwrap(), "n,median,mean,bound,ratio");
    assert_eq!(summary.lines().count(), 4);
    let results = outs[0].join("expo/results.csv");
    let code = run(&outs[0], &["rates", "fit", "--results", results.to_str().unwrap(), "--scale", "algebraic"]);
    assert_eq!(code, 0);
    let fit: serde_json::Value = serde_json::from_str(&read(outs[0].join("rates_fit/fit.json"))).unwrap();
    assert!(fit["fit"]["slope"].as_f64().unwrap() > 0.4);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    fs::write(&cfg, STUDY).unwrap();
    assert_eq!(run(dir.path(), &["--seed", "99", "rates", "run", "--config", cfg.to_str().unwrap()]), 0);
    let m: serde_json::Value = serde_json::from_str(&read(dir.path().join("expo/manifest.json"))).unwrap();
    assert_eq!(m["seed"], 99);
    assert_eq!(m["config"]["study"]["seed"], 99);
}

#[test]
fn usage_and_domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["kernel", "check", "--bogus"]), 1);
    assert_eq!(run(dir.path(), &["bounds", "report", "--model", "uniform(m=1)", "--xi", "-1", "--b", "0.05"]), 1);
    assert_eq!(run(dir.path(), &["estimate", "--model", "nonsense", "--n", "10"]), 1);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, STUDY.replace("[1024, 8192, 65536]", "[8192, 1024, 65536]")).unwrap();
    assert_eq!(run(dir.path(), &["rates", "run", "--config", bad.to_str().unwrap()]), 1);
    assert_eq!(run(dir.path(), &["rates", "run", "--config", "/nonexistent/study.cfg"]), 1);
}

#[test]
fn numeric_failure_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(
        dir.path(),
        &["deconv", "demo", "--model", "gaussian(sigma=1)", "--b", "0.05", "--a-n", "1e-3"],
    );
    assert_eq!(code, 2);
    let diag = read(dir.path().join("diagnostic.json"));
    assert!(diag.contains("deconv demo"));
}

#[test]
fn nothing_written_outside_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&out, &["deconv", "demo", "--model", "laplace", "--n", "10000", "--grid-nodes", "4096"]), 0);
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries, vec![std::ffi::OsString::from("out")]);
    let summary: serde_json::Value = serde_json::from_str(&read(out.join("deconv_demo/summary.json"))).unwrap();
    assert!(summary["identity_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn binary_uses_env_out_dir_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_mixdecon");
    let ok = Command::new(bin)
        .env("MIXDECON_OUT_DIR", dir.path())
        .args(["kernel", "check", "--qmax", "4"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("kernel_check/kernel_check.csv").exists());
    let bad = Command::new(bin)
        .env("MIXDECON_OUT_DIR", dir.path())
        .args(["bounds", "report", "--model", "uniform(m=1)", "--b", "0.05", "--vn-factor", "-2"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--vn-factor"));
}
