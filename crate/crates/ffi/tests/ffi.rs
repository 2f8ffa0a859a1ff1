use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mixdecon_ffi::*;

fn last_error() -> String {
    let p = md_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn noise_round_trip() {
    let spec = CString::new("exponential(theta=1)").unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(md_noise_new(spec.as_ptr(), 1, &mut h), MdStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(md_noise_htilde(h, 1.0, &mut re, &mut im), MdStatus::Ok);
        // 1 / (1 + i)
        assert!((re - 0.5).abs() < 1e-15 && (im + 0.5).abs() < 1e-15);
        md_noise_free(h);
    }
    assert!(md_last_error().is_null());
}

#[test]
fn errors_carry_codes_and_messages() {
    let bad = CString::new("nonsense(x=1)").unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        let st = md_noise_new(bad.as_ptr(), 1, &mut h);
        assert_ne!(st, MdStatus::Ok);
        assert!(h.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(md_noise_new(ptr::null(), 1, &mut h), MdStatus::NullPointer);
        assert!(last_error().contains("spec"));
        let mut k = ptr::null_mut();
        assert_eq!(md_kernel_new(1, 2.0, 0.5, 4, -1.0, &mut k), MdStatus::Domain);
        md_noise_free(ptr::null_mut());
    }
}

#[test]
fn sinc_plan_through_the_abi() {
    let spec = CString::new("uniform(m=1)").unwrap();
    let mut h = ptr::null_mut();
    let mut plan = ptr::null_mut();
    unsafe {
        assert_eq!(md_noise_new(spec.as_ptr(), 1, &mut h), MdStatus::Ok);
        assert_eq!(md_plan_select(h, 1e-4, 2.0, 2.0, 0.5, &mut plan), MdStatus::Ok);
        let mut info = MdPlanInfo::default();
        assert_eq!(md_plan_info(plan, &mut info), MdStatus::Ok);
        assert_eq!(info.m, 4.0);
        assert_eq!(info.delta, -1.0 / 3.0);
        assert!(info.regions > 0);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(md_plan_transfer(plan, std::f64::consts::PI, &mut re, &mut im), MdStatus::Ok);
        assert!(re > 0.0 && im == 0.0);
        md_plan_free(plan);
        md_noise_free(h);
    }
}

#[test]
fn smoothing_preserves_mass() {
    let mut k = ptr::null_mut();
    let n = 1024;
    let dx = 0.01;
    let lo = -(n as f64) / 2.0 * dx;
    let p: Vec<f64> = (0..n)
        .map(|i| {
            let y: f64 = lo + i as f64 * dx;
            if y.abs() < 1.0 { 0.75 * (1.0 - y * y) } else { 0.0 }
        })
        .collect();
    let mut out = vec![0.0; n];
    unsafe {
        assert_eq!(md_kernel_new(1, 2.0, 0.5, 4, 0.2, &mut k), MdStatus::Ok);
        let mut v = 0.0;
        assert_eq!(md_kernel_transform(k, [0.0].as_ptr(), 1, &mut v), MdStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(md_kernel_transform(k, [0.0, 0.0].as_ptr(), 2, &mut v), MdStatus::Structural);
        assert_eq!(md_smoothed_estimate(k, p.as_ptr(), n, lo, dx, out.as_mut_ptr()), MdStatus::Ok);
        md_kernel_free(k);
    }
    let m0: f64 = p.iter().sum::<f64>() * dx;
    let m1: f64 = out.iter().sum::<f64>() * dx;
    assert!((m0 - m1).abs() < 1e-12, "{m0} vs {m1}");
}

#[test]
fn study_through_the_abi() {
    let cfg = CString::new(
        r#"
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
"#,
    )
    .unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(md_study_run(cfg.as_ptr(), &mut s), MdStatus::Ok);
        let mut len = 0;
        assert_eq!(md_study_summary_len(s, &mut len), MdStatus::Ok);
        assert_eq!(len, 3);
        let mut row = MdSummaryRow::default();
        assert_eq!(md_study_summary_row(s, 0, &mut row), MdStatus::Ok);
        assert_eq!(row.n, 1024);
        assert_eq!(md_study_summary_row(s, 3, &mut row), MdStatus::OutOfRange);
        let (mut pred, mut fit, mut pass) = (0.0, 0.0, false);
        assert_eq!(md_study_exponents(s, &mut pred, &mut fit, &mut pass), MdStatus::Ok);
        assert!((pred - 2.0 / 3.5).abs() < 1e-12);
        assert!(fit.is_finite());
        md_study_free(s);
    }
    let bad = CString::new("[model]\nspec = 1").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { md_study_run(bad.as_ptr(), &mut s) }, MdStatus::Config);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(md_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "mixdecon.h"

int main(void) {
    MdNoise *h = NULL;
    if (md_noise_new("uniform(m=1)", 1, &h) != MD_STATUS_OK) return 10;
    MdPlan *plan = NULL;
    if (md_plan_select(h, 1e-4, 2.0, 2.0, 0.5, &plan) != MD_STATUS_OK) return 11;
    MdPlanInfo info;
    if (md_plan_info(plan, &info) != MD_STATUS_OK) return 12;
    if (info.m != 4.0) return 13;
    MdStatus st = md_noise_new(NULL, 1, &h);
    if (st != MD_STATUS_NULL_POINTER || md_last_error() == NULL) return 14;
    printf("%s b=%.6f\n", md_version(), info.b);
    md_plan_free(plan);
    md_noise_free(h);
    return 0;
}
"#;

/// Links a C program against the generated header and the static library.
#[test]
fn c_program_links_against_static_library() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let exe = std::env::current_exe().unwrap();
    let profile_dir: PathBuf = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libmixdecon_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let build = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}
