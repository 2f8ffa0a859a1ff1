use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{convolve, lp_norm, GridFunction, NormOrder};
use crate::rng::master_rng;
use crate::targets::Forward;

/// Perturbation `η = p·(φ − k)` with `k = ∫pφ / ∫p`, so `∫η = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum PerturbShape {
    /// `φ(y) = cos(ω (y − c))`.
    BandlimitedBump { omega: f64 },
    /// `φ(y) = Σ cos(ω_i (y − c) + θ_i) / 8` with `ω_i ~ U(0, ω_max]`,
    /// `θ_i ~ U[0, 2π)` drawn from `seed`.
    RandomPhase { omega_max: f64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct Injected {
    pub p_hat: GridFunction,
    pub f_hat: GridFunction,
    pub amplitude: f64,
    /// Measured `‖f̂ − f_p‖_u`.
    pub a_n: f64,
    /// Largest `a_n` that keeps `p̂ >= 0` for this shape.
    pub a_max: f64,
}

const BISECTION_STEPS: usize = 60;

fn shape_values(fw: &Forward, shape: &PerturbShape) -> Vec<f64> {
    let grid = fw.p.grid();
    let c = 0.5 * (grid.lo(0) + grid.hi(0));
    let phases: Vec<(f64, f64)> = match *shape {
        PerturbShape::BandlimitedBump { omega } => vec![(omega, 0.0)],
        PerturbShape::RandomPhase { omega_max, seed } => {
            let mut rng = master_rng(seed);
            (0..8)
                .map(|_| {
                    let w = omega_max * (1.0 - rng.gen::<f64>());
                    let th = std::f64::consts::TAU * rng.gen::<f64>();
                    (w, th)
                })
                .collect()
        }
    };
    let scale = 1.0 / phases.len() as f64;
    (0..grid.len())
        .map(|i| {
            let y = fw.p.coords(i)[0] - c;
            phases.iter().map(|(w, th)| (w * y + th).cos()).sum::<f64>() * scale
        })
        .collect()
}

/// Builds `p̂ = p + Aη` and `f̂ = h * p̂` with `‖f̂ − f_p‖_u = a_n`. The
/// amplitude is calibrated by bisection on the monotone map `A ↦ ‖h * Aη‖_u`.
pub fn oracle_inject(fw: &Forward, a_n: f64, u: NormOrder, shape: &PerturbShape) -> Result<Injected> {
    if !(a_n >= 0.0) || !a_n.is_finite() {
        return Err(Error::domain("a_n", format!("must be nonnegative, got {a_n}")));
    }
    if a_n == 0.0 {
        return Ok(Injected {
            p_hat: fw.p.clone(),
            f_hat: fw.f.clone(),
            amplitude: 0.0,
            a_n: 0.0,
            a_max: f64::NAN,
        });
    }
    let phi = shape_values(fw, shape);
    let p = fw.p.re();
    let mass: f64 = p.iter().sum();
    let k = p.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>() / mass;
    let centred: Vec<f64> = phi.iter().map(|v| v - k).collect();
    let eta = GridFunction::from_real(
        fw.p.grid().clone(),
        fw.p.domain(),
        p.iter().zip(&centred).map(|(a, b)| a * b).collect(),
    )?;
    let unit = lp_norm(&convolve(&eta, &fw.h)?, u)?;
    let worst = p
        .iter()
        .zip(&centred)
        .filter(|(a, _)| **a > 0.0)
        .map(|(_, b)| -b)
        .fold(0.0, f64::max);
    let a_cap = if worst > 0.0 { 1.0 / worst } else { f64::INFINITY };
    let a_max = a_cap * unit;
    if !(unit > 0.0) {
        return Err(Error::domain("a_n", "perturbation is annihilated by the noise"));
    }
    if a_n > a_max {
        return Err(Error::domain(
            "a_n",
            format!("{a_n:e} exceeds the largest feasible value {a_max:e} for this shape"),
        ));
    }
    let (mut lo, mut hi) = (0.0, if a_cap.is_finite() { a_cap } else { 2.0 * a_n / unit });
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid * unit < a_n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let amplitude = 0.5 * (lo + hi);
    let p_hat = fw.p.add(&eta.scale(amplitude))?;
    // Clamp rounding below zero at the cap.
    let p_hat = p_hat.map(|v| num_complex::Complex64::new(v.re.max(0.0), 0.0));
    let f_hat = convolve(&p_hat, &fw.h)?;
    let measured = lp_norm(&f_hat.sub(&fw.f)?, u)?;
    Ok(Injected {
        p_hat,
        f_hat,
        amplitude,
        a_n: measured,
        a_max,
    })
}
