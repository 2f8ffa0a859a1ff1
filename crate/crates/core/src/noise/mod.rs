//! Noise densities `h` and their transforms `h̃`, grouped by decay class.
//!
//! Every model is a per-axis product of one 1-d family, so `h̃(t) = Π h̃₁(t_a)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, Exp, Normal};

use crate::error::{Error, Result};
use crate::numerics::{GridBox, GridFunction};
use crate::specstr::SpecString;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseFamily {
    /// `N(0, σ²)`.
    Gaussian { sigma: f64 },
    /// Cauchy with scale `γ`.
    Cauchy { gamma: f64 },
    /// One-sided exponential with mean `θ`, supported on `[0, ∞)`.
    Exponential { theta: f64 },
    /// Laplace with scale `θ`.
    Laplace { theta: f64 },
    /// Sum of `m` independent `Uniform[-1/λ, 1/λ]`; `h̃ = (sin(t/λ)/(t/λ))^m`.
    Uniform { m: u32, lambda: f64 },
    /// Point mass at 0, `h̃ ≡ 1`.
    PointMass,
}

/// Decay class with envelope parameters. Per-axis vectors have length `d`.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelClass {
    SuperSmooth { alpha: Vec<f64>, k: f64, beta: Vec<f64> },
    Smooth { beta: Vec<f64> },
    Oscillatory { mu: u32, beta: f64, lambda: f64, onset: f64 },
    Flat,
}

impl ModelClass {
    pub fn name(&self) -> &'static str {
        match self {
            ModelClass::SuperSmooth { .. } => "supersmooth",
            ModelClass::Smooth { .. } => "smooth",
            ModelClass::Oscillatory { .. } => "oscillatory",
            ModelClass::Flat => "flat",
        }
    }
}

/// `C1 · env(t) <= |h̃(t)| <= C2 · env(t)` for `|t| >= onset` (1-d).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub c1: f64,
    pub c2: f64,
    pub onset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    family: NoiseFamily,
    d: usize,
}

/// Roots `r_j = j λ π`, `1 <= |j| <= J`, of an oscillatory transform.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub band: f64,
    pub period: f64,
    pub max_index: u64,
}

impl ZeroSet {
    pub fn count(&self) -> u64 {
        2 * self.max_index
    }

    pub fn min_separation(&self) -> f64 {
        self.period
    }

    pub fn root(&self, j: i64) -> f64 {
        j as f64 * self.period
    }

    /// Sorted `(j, r_j)` pairs. Materializes every root, so keep `band` modest.
    pub fn roots(&self) -> Vec<(i64, f64)> {
        let j = self.max_index as i64;
        (-j..=j)
            .filter(|&i| i != 0)
            .map(|i| (i, self.root(i)))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.max_index == 0
    }
}

impl NoiseModel {
    pub fn new(family: NoiseFamily, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("d", "dimension must be positive"));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain("model", format!("{name} must be positive, got {v}")))
            }
        };
        match family {
            NoiseFamily::Gaussian { sigma } => positive("sigma", sigma)?,
            NoiseFamily::Cauchy { gamma } => positive("gamma", gamma)?,
            NoiseFamily::Exponential { theta } | NoiseFamily::Laplace { theta } => {
                positive("theta", theta)?
            }
            NoiseFamily::Uniform { m, lambda } => {
                positive("lambda", lambda)?;
                if m == 0 {
                    return Err(Error::domain("model", "uniform needs m >= 1"));
                }
            }
            NoiseFamily::PointMass => {}
        }
        Ok(NoiseModel { family, d })
    }

    /// Parses `gaussian`, `gaussian(sigma=0.5)`, `cauchy(gamma=..)`,
    /// `exponential(theta=..)`, `laplace(theta=..)`, `uniform(m=2, lambda=1)`,
    /// `pointmass`.
    pub fn parse(text: &str, d: usize, origin: &str) -> Result<Self> {
        let s = SpecString::parse(text, origin)?;
        let family = match s.name.as_str() {
            "gaussian" | "normal" => {
                s.only(&["sigma"])?;
                NoiseFamily::Gaussian { sigma: s.f64_or("sigma", 1.0)? }
            }
            "cauchy" => {
                s.only(&["gamma"])?;
                NoiseFamily::Cauchy { gamma: s.f64_or("gamma", 1.0)? }
            }
            "exponential" => {
                s.only(&["theta"])?;
                NoiseFamily::Exponential { theta: s.f64_or("theta", 1.0)? }
            }
            "laplace" => {
                s.only(&["theta"])?;
                NoiseFamily::Laplace { theta: s.f64_or("theta", 1.0)? }
            }
            "uniform" | "sinc" => {
                s.only(&["m", "lambda"])?;
                NoiseFamily::Uniform {
                    m: s.u32_or("m", 1)?,
                    lambda: s.f64_or("lambda", 1.0)?,
                }
            }
            "pointmass" | "identity" => {
                s.only(&[])?;
                NoiseFamily::PointMass
            }
            other => {
                return Err(Error::domain(origin, format!("unknown noise model `{other}`")));
            }
        };
        NoiseModel::new(family, d).map_err(|e| match e {
            Error::Domain { message, .. } => Error::domain(origin, message),
            e => e,
        })
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Same family in another dimension.
    pub fn with_dim(&self, d: usize) -> Result<Self> {
        NoiseModel::new(self.family, d)
    }

    pub fn class(&self) -> ModelClass {
        let d = self.d;
        match self.family {
            NoiseFamily::Gaussian { sigma } => ModelClass::SuperSmooth {
                alpha: vec![sigma * sigma / 2.0; d],
                k: 2.0,
                beta: vec![0.0; d],
            },
            NoiseFamily::Cauchy { gamma } => ModelClass::SuperSmooth {
                alpha: vec![gamma; d],
                k: 1.0,
                beta: vec![0.0; d],
            },
            NoiseFamily::Exponential { .. } => ModelClass::Smooth { beta: vec![1.0; d] },
            NoiseFamily::Laplace { .. } => ModelClass::Smooth { beta: vec![2.0; d] },
            NoiseFamily::Uniform { m, lambda } => ModelClass::Oscillatory {
                mu: m,
                beta: m as f64,
                lambda,
                onset: lambda * PI / 2.0,
            },
            NoiseFamily::PointMass => ModelClass::Flat,
        }
    }

    pub fn is_oscillatory(&self) -> bool {
        matches!(self.family, NoiseFamily::Uniform { .. })
    }

    pub fn htilde_1d(&self, t: f64) -> Complex64 {
        match self.family {
            NoiseFamily::Exponential { theta } => Complex64::new(1.0, theta * t).inv(),
            _ => Complex64::new(self.htilde_real_1d(t), 0.0),
        }
    }

    /// Real-valued `h̃` for the symmetric families, `|h̃|` for the exponential.
    fn htilde_real_1d(&self, t: f64) -> f64 {
        match self.family {
            NoiseFamily::Gaussian { sigma } => (-0.5 * sigma * sigma * t * t).exp(),
            NoiseFamily::Cauchy { gamma } => (-gamma * t.abs()).exp(),
            NoiseFamily::Exponential { theta } => 1.0 / (1.0 + theta * theta * t * t).sqrt(),
            NoiseFamily::Laplace { theta } => 1.0 / (1.0 + theta * theta * t * t),
            NoiseFamily::Uniform { m, lambda } => sinc(t / lambda).powi(m as i32),
            NoiseFamily::PointMass => 1.0,
        }
    }

    pub fn abs_htilde_1d(&self, t: f64) -> f64 {
        self.htilde_real_1d(t).abs()
    }

    pub fn htilde(&self, t: &[f64]) -> Complex64 {
        t.iter().map(|&ti| self.htilde_1d(ti)).product()
    }

    pub fn abs_htilde(&self, t: &[f64]) -> f64 {
        t.iter().map(|&ti| self.abs_htilde_1d(ti)).product()
    }

    /// Density of one axis. Jump points take the midpoint value.
    pub fn density_1d(&self, x: f64) -> f64 {
        match self.family {
            NoiseFamily::Gaussian { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            NoiseFamily::Cauchy { gamma } => gamma / (PI * (x * x + gamma * gamma)),
            NoiseFamily::Exponential { theta } => {
                if x > 0.0 {
                    (-x / theta).exp() / theta
                } else if x == 0.0 {
                    0.5 / theta
                } else {
                    0.0
                }
            }
            NoiseFamily::Laplace { theta } => (-x.abs() / theta).exp() / (2.0 * theta),
            NoiseFamily::Uniform { m, lambda } => uniform_sum_density(m, 1.0 / lambda, x),
            NoiseFamily::PointMass => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.density_1d(xi)).product()
    }

    /// Support of one axis, possibly unbounded.
    pub fn support_1d(&self) -> (f64, f64) {
        match self.family {
            NoiseFamily::Gaussian { .. } | NoiseFamily::Cauchy { .. } | NoiseFamily::Laplace { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            NoiseFamily::Exponential { .. } => (0.0, f64::INFINITY),
            NoiseFamily::Uniform { m, lambda } => (-(m as f64) / lambda, m as f64 / lambda),
            NoiseFamily::PointMass => (0.0, 0.0),
        }
    }

    /// Interval outside of which less than about `5e-4` of the mass lies
    /// (below `1e-15` except for the Cauchy).
    pub fn effective_support_1d(&self) -> (f64, f64) {
        match self.family {
            NoiseFamily::Gaussian { sigma } => (-9.0 * sigma, 9.0 * sigma),
            NoiseFamily::Cauchy { gamma } => {
                let l = 2.0 * gamma / (PI * 5e-4);
                (-l, l)
            }
            NoiseFamily::Exponential { theta } => (0.0, 37.0 * theta),
            NoiseFamily::Laplace { theta } => (-37.0 * theta, 37.0 * theta),
            _ => self.support_1d(),
        }
    }

    pub fn envelope(&self) -> Envelope {
        match self.family {
            NoiseFamily::Gaussian { .. } | NoiseFamily::Cauchy { .. } | NoiseFamily::PointMass => {
                Envelope { c1: 1.0, c2: 1.0, onset: 0.0 }
            }
            NoiseFamily::Exponential { theta } => Envelope {
                c1: 1.0 / (theta * 2f64.sqrt()),
                c2: 1.0 / theta,
                onset: 1.0 / theta,
            },
            NoiseFamily::Laplace { theta } => Envelope {
                c1: 1.0 / (2.0 * theta * theta),
                c2: 1.0 / (theta * theta),
                onset: 1.0 / theta,
            },
            NoiseFamily::Uniform { m, lambda } => {
                let c = lambda.powi(m as i32);
                Envelope { c1: c, c2: c, onset: lambda * PI / 2.0 }
            }
        }
    }

    /// Envelope function `env(t)` of one axis.
    pub fn envelope_fn_1d(&self, t: f64) -> f64 {
        match self.class() {
            ModelClass::SuperSmooth { alpha, k, beta } => {
                (-alpha[0] * t.abs().powf(k)).exp() * t.abs().powf(beta[0])
            }
            ModelClass::Smooth { beta } => t.abs().powf(-beta[0]),
            ModelClass::Oscillatory { mu, beta, lambda, .. } => {
                (t / lambda).sin().abs().powi(mu as i32) * t.abs().powf(-beta)
            }
            ModelClass::Flat => 1.0,
        }
    }

    /// `inf |h̃|` over the box `Π [-band_a, band_a]`. The non-oscillatory
    /// families are radially decreasing on each axis, so the infimum sits at
    /// the corner.
    pub fn envelope_inf(&self, band: &[f64]) -> Result<f64> {
        if self.is_oscillatory() {
            return Err(Error::Unsupported(
                "envelope_inf: oscillatory transforms vanish at their roots".into(),
            ));
        }
        if band.len() != self.d {
            return Err(Error::Structural("band dimension mismatch".into()));
        }
        Ok(band.iter().map(|&b| self.abs_htilde_1d(b.abs())).product())
    }

    pub fn zeros_in_band(&self, m_n: f64) -> Result<ZeroSet> {
        let NoiseFamily::Uniform { lambda, .. } = self.family else {
            return Err(Error::Unsupported(format!(
                "zeros_in_band: {} has no roots",
                self.class().name()
            )));
        };
        if !(m_n > 0.0) {
            return Err(Error::domain("M_n", format!("band limit must be positive, got {m_n}")));
        }
        let period = lambda * PI;
        Ok(ZeroSet {
            band: m_n,
            period,
            max_index: (m_n / period).floor() as u64,
        })
    }

    /// `n` draws per axis, row-major `n × d`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let total = n * self.d;
        let mut out = Vec::with_capacity(total);
        match self.family {
            NoiseFamily::Gaussian { sigma } => {
                let dist = Normal::new(0.0, sigma).expect("validated sigma");
                out.extend((0..total).map(|_| dist.sample(rng)));
            }
            NoiseFamily::Cauchy { gamma } => {
                let dist = Cauchy::new(0.0, gamma).expect("validated gamma");
                out.extend((0..total).map(|_| dist.sample(rng)));
            }
            NoiseFamily::Exponential { theta } => {
                let dist = Exp::new(1.0 / theta).expect("validated theta");
                out.extend((0..total).map(|_| dist.sample(rng)));
            }
            NoiseFamily::Laplace { theta } => {
                let dist = Exp::new(1.0 / theta).expect("validated theta");
                out.extend((0..total).map(|_| {
                    let e = dist.sample(rng);
                    if rng.gen::<bool>() {
                        e
                    } else {
                        -e
                    }
                }));
            }
            NoiseFamily::Uniform { m, lambda } => {
                let a = 1.0 / lambda;
                out.extend((0..total).map(|_| (0..m).map(|_| rng.gen_range(-a..a)).sum::<f64>()));
            }
            NoiseFamily::PointMass => out.resize(total, 0.0),
        }
        out
    }

    /// Density sampled on a grid with spacing `dx` per axis whose nodes
    /// include the origin, covering the effective support. The point mass
    /// becomes a discrete delta of weight 1.
    pub fn sample_on_grid(&self, dx: &[f64]) -> Result<GridFunction> {
        if dx.len() != self.d {
            return Err(Error::Structural("spacing dimension mismatch".into()));
        }
        let (lo_x, hi_x) = self.effective_support_1d();
        let mut lo = Vec::with_capacity(self.d);
        let mut n = Vec::with_capacity(self.d);
        for &h in dx {
            let k_lo = (-lo_x / h).ceil().max(0.0) as usize + 1;
            let k_hi = (hi_x / h).ceil().max(0.0) as usize + 1;
            let count = (k_lo + k_hi + 1).next_power_of_two().max(16);
            lo.push(-(k_lo as f64) * h);
            n.push(count);
        }
        let grid = GridBox::with_spacing(lo, dx.to_vec(), n)?;
        if self.family == NoiseFamily::PointMass {
            let cell = grid.cell_volume();
            return Ok(GridFunction::sample(grid, |x| {
                if x.iter().all(|v| v.abs() < 1e-9) {
                    1.0 / cell
                } else {
                    0.0
                }
            }));
        }
        let steps = dx.to_vec();
        Ok(GridFunction::sample(grid, |x| {
            // Nodes are integer multiples of dx; rebuild them exactly so jump
            // points get the midpoint convention.
            let snapped: Vec<f64> = x
                .iter()
                .zip(&steps)
                .map(|(&v, &h)| (v / h).round() * h)
                .collect();
            self.density(&snapped)
        }))
    }

    pub fn spec_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            NoiseFamily::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            NoiseFamily::Cauchy { gamma } => write!(f, "cauchy(gamma={gamma})"),
            NoiseFamily::Exponential { theta } => write!(f, "exponential(theta={theta})"),
            NoiseFamily::Laplace { theta } => write!(f, "laplace(theta={theta})"),
            NoiseFamily::Uniform { m, lambda } => write!(f, "uniform(m={m}, lambda={lambda})"),
            NoiseFamily::PointMass => write!(f, "pointmass"),
        }
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Density of the sum of `m` independent `Uniform[-a, a]` (scaled Irwin–Hall).
fn uniform_sum_density(m: u32, a: f64, x: f64) -> f64 {
    let mf = m as f64;
    // Evaluate on the left half where the alternating sum has fewer terms.
    let y = (-x.abs() + mf * a) / (2.0 * a);
    if y < 0.0 {
        return 0.0;
    }
    if m == 1 {
        return if y == 0.0 { 0.25 / a } else { 0.5 / a };
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut k = 0u32;
    while (k as f64) <= y && k <= m {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * (y - k as f64).powi(m as i32 - 1);
        binom *= (m - k) as f64 / (k + 1) as f64;
        k += 1;
    }
    let fact: f64 = (1..m).map(|v| v as f64).product();
    sum / fact / (2.0 * a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(s: &str) -> NoiseModel {
        NoiseModel::parse(s, 1, "model").unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(model("gaussian").htilde_1d(0.0), Complex64::new(1.0, 0.0));
        assert!(model("uniform(m=1)").htilde_1d(PI).norm() < 1e-15);
        let e = model("exponential").htilde_1d(1.0).norm();
        assert!((e - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn envelope_inf_closed_forms() {
        let g = model("gaussian");
        assert!((g.envelope_inf(&[4.0]).unwrap() - (-8.0f64).exp()).abs() < 1e-18);
        let e = model("exponential");
        assert!((e.envelope_inf(&[10.0]).unwrap() - 101f64.powf(-0.5)).abs() < 1e-15);
        for s in ["gaussian", "cauchy", "exponential", "laplace", "pointmass"] {
            assert_eq!(model(s).envelope_inf(&[0.0]).unwrap(), 1.0);
        }
        assert!(matches!(
            model("uniform(m=1)").envelope_inf(&[1.0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zero_sets() {
        let z = model("uniform(m=1)").zeros_in_band(10.0).unwrap();
        assert_eq!(z.count(), 6);
        let roots: Vec<f64> = z.roots().iter().map(|r| r.1).collect();
        assert_eq!(roots, [-3.0 * PI, -2.0 * PI, -PI, PI, 2.0 * PI, 3.0 * PI]);
        assert!(model("uniform(m=1)").zeros_in_band(3.0).unwrap().is_empty());
        let z2 = model("uniform(m=2)").zeros_in_band(10.0).unwrap();
        assert_eq!(z2.roots(), z.roots());
        assert!(model("gaussian").zeros_in_band(10.0).is_err());
    }

    #[test]
    fn uniform_sum_density_normalizes() {
        for m in 1..=4 {
            let a = 0.7;
            let h = 1e-3;
            let n = (m as f64 * a / h).round() as i64;
            let mass: f64 = (-n..n)
                .map(|i| uniform_sum_density(m, a, (i as f64 + 0.5) * h))
                .sum::<f64>()
                * h;
            assert!((mass - 1.0).abs() < 1e-5, "m={m}: {mass}");
        }
        // Triangle for m = 2.
        assert!((uniform_sum_density(2, 1.0, 0.0) - 0.5).abs() < 1e-15);
        assert!((uniform_sum_density(2, 1.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn parse_rejects_unknown() {
        assert!(NoiseModel::parse("gamma", 1, "model").is_err());
        assert!(NoiseModel::parse("gaussian(s=1)", 1, "model").is_err());
        assert!(NoiseModel::parse("gaussian(sigma=-1)", 1, "model").is_err());
        let m = model("uniform(m=2, lambda=0.5)");
        assert_eq!(NoiseModel::parse(&m.to_string(), 1, "model").unwrap(), m);
    }
}
