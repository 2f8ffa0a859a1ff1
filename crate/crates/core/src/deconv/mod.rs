//! Fourier-ratio deconvolution: the filters `ψ_n` and `ψ_n*`, the regularized
//! transfer for noise with real roots, the tail functionals `T` and `S`,
//! bandwidth plans per noise class, and numeric bound reports.

mod psi;
mod report;
mod tail;
mod transfer;

use serde::Serialize;

pub use psi::{
    default_psi_grid, psi, psi_identity_error, psi_l1_report, psi_star, psi_star_identity_error,
    L1Report, Psi,
};
pub use report::{bound_report, derivative_estimate, smoothed_estimate, BoundInputs, BoundReport};
pub use tail::tail_t;
pub use transfer::{build_transfer, reg_s, Region, RegularizedTransfer, MATERIALIZED_REGIONS};

use crate::error::{Error, Result};
use crate::kernels::MultiIndex;
use crate::noise::{ModelClass, NoiseModel};
use crate::targets::SmoothnessClass;

/// Bandwidth, band limit `M_n = 2M / b^{2m}` and threshold schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandwidthPlan {
    pub b: f64,
    /// Kernel half-band `M`.
    pub half_band: f64,
    pub m: f64,
    pub m_n: f64,
    pub v_n: f64,
    pub delta: f64,
    pub xi: f64,
    pub zeta: f64,
    pub model: String,
}

impl BandwidthPlan {
    /// Plan at a given bandwidth with the class defaults for `m`, `δ` and `v_n`.
    pub fn at_bandwidth(model: &NoiseModel, b: f64, half_band: f64, xi: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain("b", format!("bandwidth must be positive, got {b}")));
        }
        if !(half_band > 0.0) {
            return Err(Error::domain("M", format!("half-band must be positive, got {half_band}")));
        }
        let (m, delta, zeta) = match model.class() {
            ModelClass::SuperSmooth { .. } | ModelClass::Flat => (0.5, 0.0, 0.0),
            ModelClass::Smooth { beta } => {
                let bb = mean(&beta);
                check_beta(bb)?;
                check_xi(xi)?;
                ((bb + 0.5 + xi) / (2.0 * bb - 1.0), 0.0, 0.0)
            }
            ModelClass::Oscillatory { mu, beta, .. } => {
                check_beta(beta)?;
                check_xi(xi)?;
                let mu = mu as f64;
                (
                    (beta + 2.0 * mu + 0.5 + xi) / (2.0 * beta - 1.0),
                    mu * (1.0 - 2.0 * beta) / (2.0 * mu + 1.0),
                    2.0 * mu * xi / (2.0 * mu + 1.0),
                )
            }
        };
        let mut plan = BandwidthPlan {
            b,
            half_band,
            m,
            m_n: 0.0,
            v_n: 0.0,
            delta,
            xi,
            zeta,
            model: model.spec_string(),
        };
        plan.set_m(model, m)?;
        Ok(plan)
    }

    /// Replaces `m` and recomputes `M_n` and `v_n`.
    pub fn with_m(mut self, model: &NoiseModel, m: f64) -> Result<Self> {
        self.set_m(model, m)?;
        Ok(self)
    }

    /// Multiplies the threshold scale `v_n`.
    pub fn scale_threshold(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::domain("vn_factor", format!("must be positive, got {factor}")));
        }
        self.v_n *= factor;
        Ok(self)
    }

    fn set_m(&mut self, model: &NoiseModel, m: f64) -> Result<()> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::domain("m", format!("band exponent must be >= 0.5, got {m}")));
        }
        self.m = m;
        self.m_n = 2.0 * self.half_band / self.b.powf(2.0 * m);
        if !self.m_n.is_finite() {
            return Err(Error::NumericRange(format!("M_n overflows for b = {}, m = {m}", self.b)));
        }
        self.v_n = match model.class() {
            ModelClass::Oscillatory { mu, beta, .. } => {
                let mu = mu as f64;
                self.b.powf(2.0 * mu * m * (2.0 * beta - 1.0) / (2.0 * mu + 1.0))
            }
            _ => model.envelope_inf(&vec![self.half_band / self.b; model.dim()])?,
        };
        Ok(())
    }

    /// Half-width `M/b` of the kernel band.
    pub fn kernel_band(&self) -> f64 {
        self.half_band / self.b
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_beta(beta: f64) -> Result<()> {
    if beta <= 0.5 {
        return Err(Error::domain("beta", format!("decay exponent must exceed 0.5, got {beta}")));
    }
    Ok(())
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::domain("xi", format!("slack must be positive, got {xi}")));
    }
    Ok(())
}

fn check_a_n(a_n: f64) -> Result<()> {
    if !(a_n > 0.0 && a_n < 1.0) {
        return Err(Error::domain("a_n", format!("must lie in (0, 1), got {a_n}")));
    }
    Ok(())
}

/// Bandwidth from the noise class and the estimation rate `a_n`.
pub fn select_bandwidth(
    model: &NoiseModel,
    a_n: f64,
    class: &SmoothnessClass,
    half_band: f64,
    xi: f64,
) -> Result<BandwidthPlan> {
    check_a_n(a_n)?;
    let d = model.dim() as f64;
    let q = class.qtilde();
    let b = match model.class() {
        ModelClass::SuperSmooth { alpha, k, .. } => {
            (4.0 * d * mean(&alpha) * half_band.powf(k) / (1.0 / a_n).ln()).powf(1.0 / k)
        }
        ModelClass::Smooth { beta } => {
            let bb = mean(&beta);
            check_beta(bb)?;
            a_n.powf(1.0 / (q + d * bb + 0.5 * d))
        }
        ModelClass::Oscillatory { mu, beta, .. } => {
            check_beta(beta)?;
            check_xi(xi)?;
            let mu = mu as f64;
            let zeta = 2.0 * mu * xi / (2.0 * mu + 1.0);
            a_n.powf(1.0 / (q + beta + 2.0 * mu + 0.5 + zeta))
        }
        ModelClass::Flat => a_n.powf(1.0 / (q + 0.5 * d)),
    };
    BandwidthPlan::at_bandwidth(model, b, half_band, xi)
}

/// Predicted decay of the error: `a_n^e` or `(log 1/a_n)^{-e}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "scale", content = "exponent", rename_all = "lowercase")]
pub enum Rate {
    Algebraic(f64),
    Logarithmic(f64),
}

impl Rate {
    pub fn exponent(&self) -> f64 {
        match *self {
            Rate::Algebraic(e) | Rate::Logarithmic(e) => e,
        }
    }

    /// Bound shape `B(a_n)` up to a constant.
    pub fn bound(&self, a_n: f64) -> f64 {
        match *self {
            Rate::Algebraic(e) => a_n.powf(e),
            Rate::Logarithmic(e) => (1.0 / a_n).ln().powf(-e),
        }
    }
}

pub fn predicted_exponent(
    model: &NoiseModel,
    class: &SmoothnessClass,
    s: &MultiIndex,
    zeta: f64,
) -> Result<Rate> {
    if s.order() > class.q {
        return Err(Error::domain(
            "deriv_order",
            format!("order {} exceeds the Hölder order q = {}", s.order(), class.q),
        ));
    }
    let d = model.dim() as f64;
    let q = class.qtilde();
    let top = q - s.order() as f64;
    Ok(match model.class() {
        ModelClass::SuperSmooth { k, .. } => Rate::Logarithmic(top / k),
        ModelClass::Smooth { beta } => Rate::Algebraic(top / (q + d * mean(&beta) + 0.5 * d)),
        ModelClass::Oscillatory { mu, beta, .. } => {
            Rate::Algebraic(top / (q + beta + 2.0 * mu as f64 + 0.5 + zeta))
        }
        ModelClass::Flat => Rate::Algebraic(top / (q + 0.5 * d)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(q: f64) -> SmoothnessClass {
        let (q_int, gamma) = SmoothnessClass::split(q).unwrap();
        SmoothnessClass { q: q_int, gamma, l: 1.0 }
    }

    #[test]
    fn sinc_schedule() {
        let h = NoiseModel::parse("uniform(m=1)", 1, "model").unwrap();
        let plan = select_bandwidth(&h, 1e-3, &class(2.0), 2.0, 0.5).unwrap();
        assert_eq!(plan.delta, -1.0 / 3.0);
        assert_eq!(plan.m, 4.0);
        assert!((plan.zeta - 1.0 / 3.0).abs() < 1e-15);
        assert!((plan.v_n - plan.b.powf(2.0 * 4.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_bandwidth() {
        let h = NoiseModel::parse("gaussian", 1, "model").unwrap();
        let plan = select_bandwidth(&h, 1e-3, &class(2.0), 2.0, 0.5).unwrap();
        assert!((plan.b * plan.b - 8.0 / 1000f64.ln()).abs() < 1e-14);
        assert_eq!(plan.m, 0.5);
        assert!(plan.m_n >= plan.half_band / plan.b);
    }

    #[test]
    fn smooth_bandwidth() {
        let h = NoiseModel::parse("exponential", 1, "model").unwrap();
        let plan = select_bandwidth(&h, 1e-2, &class(2.0), 2.0, 0.5).unwrap();
        assert!((plan.b - 1e-2f64.powf(1.0 / 3.5)).abs() < 1e-15);
    }

    #[test]
    fn exponents() {
        let z = MultiIndex::zero(1);
        let smooth = NoiseModel::parse("exponential", 1, "model").unwrap();
        let e = predicted_exponent(&smooth, &class(2.0), &z, 0.0).unwrap();
        assert!((e.exponent() - 2.0 / 3.5).abs() < 1e-15);
        let sinc = NoiseModel::parse("uniform(m=1)", 1, "model").unwrap();
        let e = predicted_exponent(&sinc, &class(2.0), &z, 0.0).unwrap();
        assert!((e.exponent() - 2.0 / 5.5).abs() < 1e-15);
        let g = NoiseModel::parse("gaussian", 1, "model").unwrap();
        let e = predicted_exponent(&g, &class(2.0), &MultiIndex(vec![1]), 0.0).unwrap();
        assert_eq!(e, Rate::Logarithmic(0.5));
        assert!(predicted_exponent(&g, &class(2.0), &MultiIndex(vec![2]), 0.0).is_err());
    }

    #[test]
    fn rejects_slow_decay() {
        let h = NoiseModel::parse("exponential", 1, "model").unwrap();
        assert!(select_bandwidth(&h, 1.5, &class(2.0), 2.0, 0.5).is_err());
    }
}
