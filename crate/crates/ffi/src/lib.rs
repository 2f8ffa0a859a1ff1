//! C ABI over `mixdecon`.
//!
//! Objects are opaque handles created by `md_*_new` (or `md_plan_select`,
//! `md_study_run`) and released by the matching `md_*_free`. Every fallible
//! call returns an [`MdStatus`]; on failure the message is kept per thread and
//! read back with [`md_last_error`]. Panics are caught at the boundary and
//! reported as `MD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mixdecon::deconv::{build_transfer, select_bandwidth, smoothed_estimate, BandwidthPlan, RegularizedTransfer};
use mixdecon::kernels::{build_kernel, scale, ScaledKernel};
use mixdecon::noise::NoiseModel;
use mixdecon::numerics::{Domain, GridBox, GridFunction};
use mixdecon::rates::{run_study, StudyConfig, StudyResult};
use mixdecon::targets::SmoothnessClass;
use mixdecon::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Structural = 4,
    Unsupported = 5,
    MustRegularize = 6,
    Numeric = 7,
    Config = 8,
    Io = 9,
    OutOfRange = 10,
    Panic = 11,
}

impl From<&Error> for MdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Structural(_) => MdStatus::Structural,
            Error::Domain { .. } => MdStatus::Domain,
            Error::Unsupported(_) => MdStatus::Unsupported,
            Error::MustRegularize { .. } => MdStatus::MustRegularize,
            Error::Config { .. } => MdStatus::Config,
            Error::Io(_) => MdStatus::Io,
            _ => MdStatus::Numeric,
        }
    }
}

/// Noise model handle.
pub struct MdNoise(NoiseModel);

/// Scaled flat-top kernel handle.
pub struct MdKernel(ScaledKernel);

/// Bandwidth plan together with its transfer function.
pub struct MdPlan {
    plan: BandwidthPlan,
    transfer: RegularizedTransfer,
}

/// Finished rate study.
pub struct MdStudy(StudyResult);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MdPlanInfo {
    pub b: f64,
    pub m: f64,
    pub m_n: f64,
    pub v_n: f64,
    pub delta: f64,
    pub zeta: f64,
    /// Regions materialized around roots of the noise transform.
    pub regions: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MdSummaryRow {
    pub n: u64,
    pub a_n: f64,
    pub median: f64,
    pub mean: f64,
    pub bound: f64,
    pub ratio: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: MdStatus, msg: impl Into<String>) -> MdStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping library errors and panics onto status codes.
fn guard(f: impl FnOnce() -> Result<(), MdStatus>) -> MdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MdStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(MdStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, MdStatus>;
}

impl<T> OrStatus<T> for mixdecon::Result<T> {
    fn or_status(self) -> Result<T, MdStatus> {
        self.map_err(|e| fail(MdStatus::from(&e), e.to_string()))
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, MdStatus> {
    if p.is_null() {
        return Err(fail(MdStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MdStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, MdStatus> {
    p.as_ref()
        .ok_or_else(|| fail(MdStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, MdStatus> {
    p.as_mut()
        .ok_or_else(|| fail(MdStatus::NullPointer, format!("{name} is null")))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next `md_*` call on the same thread.
#[no_mangle]
pub extern "C" fn md_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn md_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a noise spec such as `"uniform(m=1)"` in dimension `d`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn md_noise_new(spec: *const c_char, d: usize, out: *mut *mut MdNoise) -> MdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = str_arg(spec, "spec")?;
        let model = NoiseModel::parse(spec, d, "spec").or_status()?;
        *out = Box::into_raw(Box::new(MdNoise(model)));
        Ok(())
    })
}

/// `h̃(t)` along the first axis.
///
/// # Safety
/// `noise` must come from [`md_noise_new`]; `re` and `im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_noise_htilde(noise: *const MdNoise, t: f64, re: *mut f64, im: *mut f64) -> MdStatus {
    guard(|| {
        let noise = ref_arg(noise, "noise")?;
        let (re, im) = (out_arg(re, "re")?, out_arg(im, "im")?);
        let v = noise.0.htilde_1d(t);
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// # Safety
/// `noise` must come from [`md_noise_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn md_noise_free(noise: *mut MdNoise) {
    if !noise.is_null() {
        drop(Box::from_raw(noise));
    }
}

/// Flat-top kernel with half-band `half_band`, flat fraction `rho` and leg
/// order `leg`, scaled to bandwidth `b`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn md_kernel_new(
    d: usize,
    half_band: f64,
    rho: f64,
    leg: u32,
    b: f64,
    out: *mut *mut MdKernel,
) -> MdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let k = build_kernel(d, half_band, rho, leg).or_status()?;
        let kn = scale(&k, b).or_status()?;
        *out = Box::into_raw(Box::new(MdKernel(kn)));
        Ok(())
    })
}

/// `K̃_n(t)` at a point of dimension `d` given by `t[0..d]`.
///
/// # Safety
/// `t` must point to `d` doubles matching the kernel dimension.
#[no_mangle]
pub unsafe extern "C" fn md_kernel_transform(kernel: *const MdKernel, t: *const f64, d: usize, out: *mut f64) -> MdStatus {
    guard(|| {
        let kernel = ref_arg(kernel, "kernel")?;
        let out = out_arg(out, "out")?;
        if t.is_null() {
            return Err(fail(MdStatus::NullPointer, "t is null"));
        }
        if d != kernel.0.base().dim() {
            return Err(fail(MdStatus::Structural, "point dimension does not match the kernel"));
        }
        *out = kernel.0.transform(std::slice::from_raw_parts(t, d));
        Ok(())
    })
}

/// `K_n * p̂` for a one-dimensional `p̂` sampled at `lo + k·dx`, `k < n`.
/// The grid must resolve the kernel band and leave room for its tails.
///
/// # Safety
/// `values` and `out` must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn md_smoothed_estimate(
    kernel: *const MdKernel,
    values: *const f64,
    n: usize,
    lo: f64,
    dx: f64,
    out: *mut f64,
) -> MdStatus {
    guard(|| {
        let kernel = ref_arg(kernel, "kernel")?;
        if values.is_null() || out.is_null() {
            return Err(fail(MdStatus::NullPointer, "values or out is null"));
        }
        let grid = GridBox::with_spacing(vec![lo], vec![dx], vec![n]).or_status()?;
        let vals = std::slice::from_raw_parts(values, n).to_vec();
        let p_hat = GridFunction::from_real(grid, Domain::Spatial, vals).or_status()?;
        let est = smoothed_estimate(&p_hat, &kernel.0).or_status()?;
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (d, v) in dst.iter_mut().zip(est.values()) {
            *d = v.re;
        }
        Ok(())
    })
}

/// # Safety
/// `kernel` must come from [`md_kernel_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn md_kernel_free(kernel: *mut MdKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Plan for rate `a_n` and a target of Hölder order `qtilde` (constant 1),
/// with its regularized transfer.
///
/// # Safety
/// `noise` must come from [`md_noise_new`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_plan_select(
    noise: *const MdNoise,
    a_n: f64,
    qtilde: f64,
    half_band: f64,
    xi: f64,
    out: *mut *mut MdPlan,
) -> MdStatus {
    guard(|| {
        let noise = ref_arg(noise, "noise")?;
        let out = out_arg(out, "out")?;
        let (q, gamma) = SmoothnessClass::split(qtilde).or_status()?;
        let class = SmoothnessClass { q, gamma, l: 1.0 };
        let plan = select_bandwidth(&noise.0, a_n, &class, half_band, xi).or_status()?;
        let transfer = build_transfer(&noise.0, &plan).or_status()?;
        *out = Box::into_raw(Box::new(MdPlan { plan, transfer }));
        Ok(())
    })
}

/// # Safety
/// `plan` must come from [`md_plan_select`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_plan_info(plan: *const MdPlan, out: *mut MdPlanInfo) -> MdStatus {
    guard(|| {
        let plan = ref_arg(plan, "plan")?;
        let out = out_arg(out, "out")?;
        let p = &plan.plan;
        *out = MdPlanInfo {
            b: p.b,
            m: p.m,
            m_n: p.m_n,
            v_n: p.v_n,
            delta: p.delta,
            zeta: p.zeta,
            regions: plan.transfer.regions().len(),
        };
        Ok(())
    })
}

/// `h̃_n*(t)` along the first axis.
///
/// # Safety
/// `plan` must come from [`md_plan_select`]; `re` and `im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_plan_transfer(plan: *const MdPlan, t: f64, re: *mut f64, im: *mut f64) -> MdStatus {
    guard(|| {
        let plan = ref_arg(plan, "plan")?;
        let (re, im) = (out_arg(re, "re")?, out_arg(im, "im")?);
        let v = plan.transfer.eval_1d(t);
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// # Safety
/// `plan` must come from [`md_plan_select`] or be null.
#[no_mangle]
pub unsafe extern "C" fn md_plan_free(plan: *mut MdPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Runs a study from the text of a TOML config.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn md_study_run(config: *const c_char, out: *mut *mut MdStudy) -> MdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(config, "config")?;
        let cfg = StudyConfig::from_toml(text).or_status()?;
        let res = run_study(&cfg).or_status()?;
        *out = Box::into_raw(Box::new(MdStudy(res)));
        Ok(())
    })
}

/// Number of rows of the per-`n` summary.
///
/// # Safety
/// `study` must come from [`md_study_run`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_study_summary_len(study: *const MdStudy, out: *mut usize) -> MdStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(study, "study")?.0.summary.len();
        Ok(())
    })
}

/// # Safety
/// `study` must come from [`md_study_run`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_study_summary_row(study: *const MdStudy, index: usize, out: *mut MdSummaryRow) -> MdStatus {
    guard(|| {
        let study = ref_arg(study, "study")?;
        let out = out_arg(out, "out")?;
        let Some(r) = study.0.summary.get(index) else {
            return Err(fail(
                MdStatus::OutOfRange,
                format!("row {index} of {}", study.0.summary.len()),
            ));
        };
        *out = MdSummaryRow {
            n: r.n,
            a_n: r.a_n,
            median: r.median,
            mean: r.mean,
            bound: r.bound,
            ratio: r.ratio,
        };
        Ok(())
    })
}

/// Predicted and fitted exponents and the pass flag. `fitted` is NaN when
/// fewer than three sample sizes produced errors.
///
/// # Safety
/// `study` must come from [`md_study_run`]; the outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_study_exponents(
    study: *const MdStudy,
    predicted: *mut f64,
    fitted: *mut f64,
    pass: *mut bool,
) -> MdStatus {
    guard(|| {
        let study = ref_arg(study, "study")?;
        *out_arg(predicted, "predicted")? = study.0.predicted.exponent();
        *out_arg(fitted, "fitted")? = study.0.fitted_exponent().unwrap_or(f64::NAN);
        *out_arg(pass, "pass")? = study.0.pass;
        Ok(())
    })
}

/// # Safety
/// `study` must come from [`md_study_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn md_study_free(study: *mut MdStudy) {
    if !study.is_null() {
        drop(Box::from_raw(study));
    }
}
