//! The smoothed estimate `K_n * p̂` and the terms of the general error bound.

use num_complex::Complex64;
use serde::Serialize;

use super::psi::psi_star;
use super::tail::tail_t;
use super::transfer::{reg_s, RegularizedTransfer};
use super::BandwidthPlan;
use crate::error::{Error, Result};
use crate::kernels::{MultiIndex, ScaledKernel};
use crate::numerics::{
    apply_multiplier, fmt_f64, fourier, inverse_fourier, lp_norm, parseval_constant, GridFunction,
    NormOrder,
};
use crate::targets::SmoothnessClass;

fn real_part(f: GridFunction) -> GridFunction {
    f.map(|v| Complex64::new(v.re, 0.0))
}

/// `K_n * p̂` by the multiplier `K̃_n` on the grid of `p̂`. The grid must
/// leave room for the kernel tails; the product is circular.
pub fn smoothed_estimate(p_hat: &GridFunction, kn: &ScaledKernel) -> Result<GridFunction> {
    kn.check_grid(p_hat.grid())?;
    Ok(real_part(apply_multiplier(p_hat, |t| Complex64::new(kn.transform(t), 0.0))?))
}

/// `K_n^{(s)} * p̂` via the multiplier `(it)^s K̃_n`.
pub fn derivative_estimate(p_hat: &GridFunction, kn: &ScaledKernel, s: &MultiIndex) -> Result<GridFunction> {
    kn.check_grid(p_hat.grid())?;
    kn.check_order(s)?;
    Ok(real_part(apply_multiplier(p_hat, |t| {
        kn.derivative_symbol(t, s) * kn.transform(t)
    })?))
}

/// Numeric terms of
/// `‖p̂−p‖(1 − Ĉ‖ψ̃*‖₂(S+T)) <= approximation + Ĉ‖ψ̃*‖₂ a_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub b: f64,
    pub m: f64,
    pub m_n: f64,
    pub v_n: f64,
    /// Measured `‖f̂ − f_p‖_u`.
    pub a_n: f64,
    pub psi_star_l2: f64,
    pub psi_star_l1: f64,
    pub tail_t: f64,
    pub reg_s: f64,
    pub c_hat: f64,
    pub c_lhs: f64,
    pub c_lhs_positive: bool,
    pub c_lhs_at_least_half: bool,
    /// `L b^{q̃}`.
    pub approx: f64,
    /// `‖K_n * p − p‖_u` on the grid.
    pub approx_measured: f64,
    /// `‖ψ̃*‖₂ a_n`.
    pub transfer: f64,
    pub rhs: f64,
    /// `rhs / c_lhs`, infinite when `c_lhs <= 0`.
    pub implied: f64,
    /// `‖K_n * (p̂ − p)‖_u`.
    pub lhs_direct: f64,
    /// `‖ψ_n* * (f̂ − f_p)‖_u`.
    pub psi_route: f64,
    /// `‖ψ_n* * (h − h_n*) * (p̂ − p)‖_u`.
    pub regularization_term: f64,
    /// `‖ψ_n*‖₁ ‖f̂ − f_p‖_u`.
    pub young_bound: f64,
    pub proof_chain_ok: bool,
    /// Measured constant in front of `‖ψ̃*‖₂ (S+T) ‖p̂ − p‖_u`.
    pub c_left: f64,
    /// Measured constant in front of `‖ψ̃*‖₂ a_n`.
    pub c_right: f64,
    /// `‖K_n * p̂ − p‖_u`.
    pub error: f64,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str = "b,m,M_n,v_n,a_n,psi_star_l2,psi_star_l1,T,S,c_hat,c_lhs,c_lhs_positive,c_lhs_at_least_half,approx,approx_measured,transfer,rhs,implied,lhs_direct,psi_route,regularization_term,young_bound,proof_chain_ok,c_left,c_right,error";

    pub fn csv_row(&self) -> String {
        let f = fmt_f64;
        [
            f(self.b),
            f(self.m),
            f(self.m_n),
            f(self.v_n),
            f(self.a_n),
            f(self.psi_star_l2),
            f(self.psi_star_l1),
            f(self.tail_t),
            f(self.reg_s),
            f(self.c_hat),
            f(self.c_lhs),
            self.c_lhs_positive.to_string(),
            self.c_lhs_at_least_half.to_string(),
            f(self.approx),
            f(self.approx_measured),
            f(self.transfer),
            f(self.rhs),
            f(self.implied),
            f(self.lhs_direct),
            f(self.psi_route),
            f(self.regularization_term),
            f(self.young_bound),
            self.proof_chain_ok.to_string(),
            f(self.c_left),
            f(self.c_right),
            f(self.error),
        ]
        .join(",")
    }
}

/// Grids of the mixing side (`p̂`, `p`) and the observation side (`f̂`, `f_p`).
/// The mixing grid must embed into the observation grid.
#[derive(Clone, Copy, Debug)]
pub struct BoundInputs<'a> {
    pub p_hat: &'a GridFunction,
    pub p: &'a GridFunction,
    pub f_hat: &'a GridFunction,
    pub f_p: &'a GridFunction,
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn bound_report(
    inputs: BoundInputs<'_>,
    kn: &ScaledKernel,
    plan: &BandwidthPlan,
    transfer: &RegularizedTransfer,
    class: &SmoothnessClass,
    u: NormOrder,
) -> Result<BoundReport> {
    let model = transfer.model();
    if model.family() == crate::noise::NoiseFamily::PointMass {
        return Err(Error::Unsupported("bound report for a point-mass model: T is infinite".into()));
    }
    let grid = inputs.f_hat.grid().clone();
    let dp = inputs.p_hat.sub(inputs.p)?.embed_into(&grid)?;
    let p_big = inputs.p.embed_into(&grid)?;
    let df = inputs.f_hat.sub(inputs.f_p)?;
    let ps = psi_star(kn, transfer, &grid)?;
    let d = model.dim();

    let a_n = lp_norm(&df, u)?;
    let kdp = real_part(apply_multiplier(&dp, |t| Complex64::new(kn.transform(t), 0.0))?);
    let lhs_direct = lp_norm(&kdp, u)?;

    let df_spec = fourier(&df)?;
    let routed = df_spec.zip_with(&ps.spectrum, |a, b| a * b)?;
    let psi_route = lp_norm(&real_part(inverse_fourier(&routed)?), u)?;

    let dp_spec = fourier(&dp)?;
    let gap = dp_spec
        .zip_with(&ps.spectrum, |a, b| a * b)?
        .map_with_coords(|t, v| v * (model.htilde(t) - transfer.eval(t)));
    let regularization_term = lp_norm(&real_part(inverse_fourier(&gap)?), u)?;

    let psi_star_l1 = ps.l1();
    let young_bound = psi_star_l1 * a_n;
    let slack = 1e-8;
    let chain = psi_route <= young_bound + slack + 1e-12 * young_bound
        && lhs_direct <= young_bound + regularization_term + slack + 1e-12 * young_bound;

    let tail = tail_t(model, plan.m_n)?;
    let s = reg_s(transfer);
    let c_hat = parseval_constant(d);
    let c_lhs = 1.0 - c_hat * ps.l2 * (s + tail);
    let approx = class.l * kn.bandwidth().powf(class.qtilde());
    let kp = smoothed_estimate(&p_big, kn)?;
    let approx_measured = lp_norm(&kp.sub(&p_big)?, u)?;
    let transfer_term = ps.l2 * a_n;
    let rhs = approx + c_hat * transfer_term;
    let implied = if c_lhs > 0.0 { rhs / c_lhs } else { f64::INFINITY };
    let est = smoothed_estimate(&inputs.p_hat.embed_into(&grid)?, kn)?;
    let error = lp_norm(&est.sub(&p_big)?, u)?;
    let dp_norm = lp_norm(&dp, u)?;

    Ok(BoundReport {
        b: kn.bandwidth(),
        m: plan.m,
        m_n: plan.m_n,
        v_n: plan.v_n,
        a_n,
        psi_star_l2: ps.l2,
        psi_star_l1,
        tail_t: tail,
        reg_s: s,
        c_hat,
        c_lhs,
        c_lhs_positive: c_lhs > 0.0,
        c_lhs_at_least_half: c_lhs >= 0.5,
        approx,
        approx_measured,
        transfer: transfer_term,
        rhs,
        implied,
        lhs_direct,
        psi_route,
        regularization_term,
        young_bound,
        proof_chain_ok: chain,
        c_left: ratio_or_zero(regularization_term, ps.l2 * (s + tail) * dp_norm),
        c_right: ratio_or_zero(psi_route, transfer_term),
        error,
    })
}
