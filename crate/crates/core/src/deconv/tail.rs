//! `T(M_n) = ‖h̃ − h̃·1[‖t‖_∞ <= M_n]‖₂`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::noise::{NoiseFamily, NoiseModel};
use crate::numerics::quad::GaussLegendre;

/// Start of the asymptotic expansion for the sinc tail.
const SINC_SWITCH: f64 = 60.0;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `∫_X^∞ cos(ωx) x^{-p} dx` by repeated integration by parts.
fn cos_power_tail(omega: f64, p: f64, x: f64) -> f64 {
    let e = Complex64::from_polar(1.0, omega * x);
    let iw = Complex64::new(0.0, omega);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut rising = 1.0;
    let mut denom = iw;
    for n in 0..30 {
        let term = rising * x.powf(-p - n as f64) / denom;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        rising *= p + n as f64;
        denom *= iw;
    }
    (-e * sum).re
}

/// `∫_a^∞ (sin x / x)^{2m} dx`.
fn sinc_power_tail(m: u32, a: f64) -> f64 {
    let p = 2.0 * m as f64;
    let expansion = |x: f64| {
        let scale = 4f64.powi(-(m as i32));
        let mut out = binomial(2 * m, m) * x.powf(1.0 - p) / (p - 1.0);
        for k in 1..=m {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out += 2.0 * sign * binomial(2 * m, m - k) * cos_power_tail(2.0 * k as f64, p, x);
        }
        scale * out
    };
    if a >= SINC_SWITCH {
        return expansion(a);
    }
    let gl = GaussLegendre::new(20);
    let f = |x: f64| crate::noise::sinc(x).powi(2 * m as i32);
    let mut total = 0.0;
    let mut lo = a;
    while lo < SINC_SWITCH {
        let hi = (lo + 0.5 * PI).min(SINC_SWITCH);
        total += gl.integrate(lo, hi, f);
        lo = hi;
    }
    total + expansion(SINC_SWITCH)
}

/// `∫_{|t| > M} |h̃(t)|² dt` on one axis.
fn tail_sq_1d(family: NoiseFamily, m_n: f64) -> f64 {
    match family {
        NoiseFamily::Gaussian { sigma } => PI.sqrt() / sigma * libm::erfc(sigma * m_n),
        NoiseFamily::Cauchy { gamma } => (-2.0 * gamma * m_n).exp() / gamma,
        NoiseFamily::Exponential { theta } => 2.0 * (1.0 / (theta * m_n)).atan() / theta,
        NoiseFamily::Laplace { theta } => {
            let u = theta * m_n;
            if u >= 10.0 {
                // atan(w) − w/(1+w²) with w = 1/u, summed termwise.
                let w = 1.0 / u;
                let w2 = w * w;
                let mut term = w * w2;
                let mut out = 0.0;
                for k in 1..20 {
                    let kf = k as f64;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    out += sign * 2.0 * kf / (2.0 * kf + 1.0) * term;
                    term *= w2;
                }
                out / theta
            } else {
                ((1.0 / u).atan() - u / (1.0 + u * u)) / theta
            }
        }
        NoiseFamily::Uniform { m, lambda } => 2.0 * lambda * sinc_power_tail(m, m_n / lambda),
        NoiseFamily::PointMass => f64::INFINITY,
    }
}

fn full_sq_1d(family: NoiseFamily) -> f64 {
    match family {
        NoiseFamily::Gaussian { sigma } => PI.sqrt() / sigma,
        NoiseFamily::Cauchy { gamma } => 1.0 / gamma,
        NoiseFamily::Exponential { theta } => PI / theta,
        NoiseFamily::Laplace { theta } => PI / (2.0 * theta),
        NoiseFamily::Uniform { m, lambda } => 2.0 * lambda * sinc_power_tail(m, 0.0),
        NoiseFamily::PointMass => f64::INFINITY,
    }
}

/// Closed forms per family; `d >= 2` by inclusion–exclusion over the cube.
pub fn tail_t(model: &NoiseModel, m_n: f64) -> Result<f64> {
    if !(m_n > 0.0) {
        return Err(Error::domain("M_n", format!("band limit must be positive, got {m_n}")));
    }
    let d = model.dim() as u32;
    let tau = tail_sq_1d(model.family(), m_n);
    if d == 1 {
        return Ok(tau.sqrt());
    }
    if model.is_oscillatory() {
        return Err(Error::Unsupported("tail_t for oscillatory noise in d >= 2".into()));
    }
    let full = full_sq_1d(model.family());
    // full^d − (full − τ)^d = Σ_k C(d,k) (−1)^{k+1} full^{d−k} τ^k
    let mut sum = 0.0;
    for k in 1..=d {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * binomial(d, k) * full.powi((d - k) as i32) * tau.powi(k as i32);
    }
    Ok(sum.max(0.0).sqrt())
}
