//! Flat-top kernels: `K̃` is 1 on `[-ρM, ρM]`, falls to 0 on a polynomial leg
//! and vanishes beyond `M`. Products over axes give the `d`-dimensional kernel.

mod moments;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{inverse_fourier, quad::GaussLegendre, GridBox, GridFunction};

pub use moments::{verify_moments, MomentEntry, MomentReport};

/// Multi-index `s = (s_1, …, s_d)` for derivatives and moments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// `s` along the first axis, zero elsewhere.
    pub fn along_first(d: usize, s: u32) -> Self {
        let mut v = vec![0; d];
        v[0] = s;
        MultiIndex(v)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// All multi-indices of dimension `d` with order exactly `k`.
    pub fn all_of_order(d: usize, k: u32) -> Vec<MultiIndex> {
        if d == 1 {
            return vec![MultiIndex(vec![k])];
        }
        let mut out = Vec::new();
        for first in (0..=k).rev() {
            for rest in MultiIndex::all_of_order(d - 1, k - first) {
                let mut v = vec![first];
                v.extend(rest.0);
                out.push(MultiIndex(v));
            }
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(":"))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.split([':', ','])
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::domain("deriv_order", format!("bad multi-index `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }
}

/// `S_r(u) = u^r Σ_{k<r} C(r-1+k, k) (1-u)^k`, the degree `2r-1` smoothstep with
/// `r-1` vanishing derivatives at both ends. `S_1(u) = u` gives the trapezoid.
pub(crate) fn smoothstep(r: u32, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let v = 1.0 - u;
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut vk = 1.0;
    for k in 0..r {
        if k > 0 {
            binom *= (r - 1 + k) as f64 / k as f64;
            vk *= v;
        }
        sum += binom * vk;
    }
    u.powi(r as i32) * sum
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatTopKernel {
    d: usize,
    m: f64,
    rho: f64,
    leg: u32,
    leg_jumps: Vec<f64>,
}

impl FlatTopKernel {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Half-bandwidth `M`.
    pub fn half_band(&self) -> f64 {
        self.m
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn leg(&self) -> u32 {
        self.leg
    }

    /// `K(x)` decays like `|x|^{-(r+1)}`.
    pub fn decay_exponent(&self) -> f64 {
        self.leg as f64 + 1.0
    }

    /// Highest derivative order the estimator may take through this kernel.
    pub fn derivative_budget(&self) -> u32 {
        self.leg.saturating_sub(1).max(1)
    }

    pub fn transform_1d(&self, t: f64) -> f64 {
        let a = t.abs();
        let flat = self.rho * self.m;
        if a <= flat {
            1.0
        } else if a >= self.m {
            0.0
        } else {
            1.0 - smoothstep(self.leg, (a - flat) / ((1.0 - self.rho) * self.m))
        }
    }

    pub fn transform(&self, t: &[f64]) -> f64 {
        t.iter().map(|&ti| self.transform_1d(ti)).product()
    }

    /// One-dimensional `K(x)`. Closed form for the trapezoid; for smoothed
    /// legs, `(1/π)∫_0^M K̃(t) cos(tx) dt` with the flat part done exactly and
    /// the leg by Gauss–Legendre.
    pub fn value_1d(&self, x: f64) -> f64 {
        let (m, rho) = (self.m, self.rho);
        if self.leg == 1 {
            if x.abs() < 1e-4 / m {
                // Series of the closed form about 0.
                let x2 = x * x;
                let c2 = (m.powi(4) - (rho * m).powi(4)) / 24.0;
                return (m * m * (1.0 - rho * rho) / 2.0 - c2 * x2)
                    / (PI * (1.0 - rho) * m);
            }
            return ((rho * m * x).cos() - (m * x).cos()) / (PI * (1.0 - rho) * m * x * x);
        }
        let flat = rho * m;
        let w = (1.0 - rho) * m;
        if x.abs() * w >= (2 * self.leg).max(20) as f64 {
            return self.value_far(x);
        }
        let flat_part = if x == 0.0 { flat } else { (flat * x).sin() / x };
        let cycles = (1.0 - rho) * m * x.abs() / (2.0 * PI);
        let panels = 2 + (2.0 * cycles).ceil() as usize;
        let h = (m - flat) / panels as f64;
        let gl = gl16();
        let leg: f64 = (0..panels)
            .map(|i| {
                let a = flat + i as f64 * h;
                gl.integrate(a, a + h, |t| self.transform_1d(t) * (t * x).cos())
            })
            .sum();
        (flat_part + leg) / PI
    }

    /// Exact expansion by repeated integration by parts over the polynomial
    /// leg; only the jumps of `S_r^{(j)}`, `r <= j < 2r`, survive. Terms shrink
    /// when `|x| (1-ρ) M` exceeds the leg degree, so this is used far out where
    /// the quadrature form loses relative accuracy.
    fn value_far(&self, x: f64) -> f64 {
        let a = self.rho * self.m;
        let w = (1.0 - self.rho) * self.m;
        let r = self.leg as usize;
        let mut total = 0.0;
        for (i, &s0) in self.leg_jumps.iter().enumerate() {
            let j = r + i;
            let s1 = if (j + 1) % 2 == 0 { s0 } else { -s0 };
            let phase = j as f64 * PI / 2.0;
            let term = -s1 * (self.m * x + phase).sin() + s0 * (a * x + phase).sin();
            total += term / (w.powi(j as i32) * x.powi(j as i32 + 1));
        }
        total / PI
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.value_1d(xi)).product()
    }

    /// Spatial samples on `grid`: the closed form for the trapezoid, otherwise
    /// the inverse transform of the sampled `K̃`.
    pub fn spatial_on(&self, grid: &GridBox) -> Result<GridFunction> {
        ScaledKernel::new(self.clone(), 1.0)?.spatial_on(grid)
    }
}

fn gl16() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(16))
}

pub fn build_kernel(d: usize, m: f64, rho: f64, leg: u32) -> Result<FlatTopKernel> {
    if d == 0 {
        return Err(Error::domain("d", "dimension must be positive"));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain("M", format!("half-band must be positive, got {m}")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain("rho", format!("flat fraction must lie in (0,1), got {rho}")));
    }
    if leg == 0 {
        return Err(Error::domain("leg", "leg smoothness must be >= 1"));
    }
    Ok(FlatTopKernel {
        d,
        m,
        rho,
        leg,
        leg_jumps: leg_jumps(leg),
    })
}

/// `S_r^{(j)}(0)` for `j = r..2r-1`; the derivatives at 1 follow from
/// `S_r(1-u) = 1 - S_r(u)`.
fn leg_jumps(r: u32) -> Vec<f64> {
    let r = r as usize;
    let binom = |n: usize, k: usize| -> i128 {
        let mut b: i128 = 1;
        for i in 0..k {
            b = b * (n - i) as i128 / (i + 1) as i128;
        }
        b
    };
    let mut coeff = vec![0i128; 2 * r];
    for k in 0..r {
        let c = binom(r - 1 + k, k);
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            coeff[r + i] += sign * c * binom(k, i);
        }
    }
    (r..2 * r)
        .map(|j| {
            let fact: f64 = (1..=j).map(|v| v as f64).product();
            fact * coeff[j] as f64
        })
        .collect()
}

/// `K_n(x) = b^{-d} K(x/b)`, `K̃_n(t) = K̃(tb)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledKernel {
    base: FlatTopKernel,
    b: f64,
}

impl ScaledKernel {
    pub fn new(base: FlatTopKernel, b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain("b", format!("bandwidth must be positive, got {b}")));
        }
        Ok(ScaledKernel { base, b })
    }

    pub fn base(&self) -> &FlatTopKernel {
        &self.base
    }

    pub fn bandwidth(&self) -> f64 {
        self.b
    }

    /// Half-width `M/b` of the support of `K̃_n`.
    pub fn band(&self) -> f64 {
        self.base.m / self.b
    }

    pub fn transform(&self, t: &[f64]) -> f64 {
        t.iter().map(|&ti| self.base.transform_1d(ti * self.b)).product()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let d = self.base.d as i32;
        x.iter().map(|&xi| self.base.value_1d(xi / self.b)).product::<f64>() / self.b.powi(d)
    }

    pub(crate) fn check_grid(&self, grid: &GridBox) -> Result<()> {
        if grid.dim() != self.base.d {
            return Err(Error::Structural(format!(
                "kernel dimension {} does not match grid dimension {}",
                self.base.d,
                grid.dim()
            )));
        }
        for a in 0..grid.dim() {
            if grid.nyquist(a) < self.band() {
                return Err(Error::Structural(format!(
                    "axis {a}: grid resolves |t| <= {:.4}, kernel band needs {:.4}",
                    grid.nyquist(a),
                    self.band()
                )));
            }
        }
        Ok(())
    }

    pub fn spatial_on(&self, grid: &GridBox) -> Result<GridFunction> {
        self.check_grid(grid)?;
        if self.base.leg == 1 {
            return Ok(GridFunction::sample(grid.clone(), |x| self.value(x)));
        }
        let spec = GridFunction::sample_frequency(grid.clone(), |t| {
            Complex64::new(self.transform(t), 0.0)
        });
        inverse_fourier(&spec)
    }

    /// `K_n^{(s)}` on `grid` as the inverse transform of `(it)^s K̃_n`.
    pub fn derivative_on(&self, grid: &GridBox, s: &MultiIndex) -> Result<GridFunction> {
        self.check_grid(grid)?;
        self.check_order(s)?;
        let spec = GridFunction::sample_frequency(grid.clone(), |t| {
            self.derivative_symbol(t, s) * self.transform(t)
        });
        inverse_fourier(&spec)
    }

    pub(crate) fn check_order(&self, s: &MultiIndex) -> Result<()> {
        if s.dim() != self.base.d {
            return Err(Error::domain("deriv_order", "multi-index dimension mismatch"));
        }
        if s.order() > self.base.derivative_budget() {
            return Err(Error::domain(
                "deriv_order",
                format!(
                    "order {} exceeds the budget {} of a leg-{} kernel",
                    s.order(),
                    self.base.derivative_budget(),
                    self.base.leg
                ),
            ));
        }
        Ok(())
    }

    /// `(it)^s = Π_a (i t_a)^{s_a}`.
    pub fn derivative_symbol(&self, t: &[f64], s: &MultiIndex) -> Complex64 {
        let mut out = Complex64::new(1.0, 0.0);
        for (ti, &si) in t.iter().zip(&s.0) {
            out *= Complex64::new(0.0, *ti).powu(si);
        }
        out
    }
}

pub fn scale(k: &FlatTopKernel, b: f64) -> Result<ScaledKernel> {
    ScaledKernel::new(k.clone(), b)
}

pub fn kernel_derivative(kn: &ScaledKernel, grid: &GridBox, s: &MultiIndex) -> Result<GridFunction> {
    kn.derivative_on(grid, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_geometry() {
        let k = build_kernel(1, 2.0, 0.5, 1).unwrap();
        assert_eq!(k.transform_1d(1.0), 1.0);
        assert_eq!(k.transform_1d(1.5), 0.5);
        assert_eq!(k.transform_1d(2.5), 0.0);
        assert_eq!(k.transform_1d(-1.5), 0.5);
    }

    #[test]
    fn trapezoid_peak() {
        let k = build_kernel(1, 2.0, 0.5, 1).unwrap();
        assert!((k.value_1d(0.0) - 3.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((k.value_1d(1e-6) - k.value_1d(0.0)).abs() < 1e-12);
        // Numeric inverse transform agrees with the closed form.
        let g = GridBox::line(-64.0, 64.0, 1 << 12).unwrap();
        let spec = GridFunction::sample_frequency(g, |t| Complex64::new(k.transform(t), 0.0));
        let inv = inverse_fourier(&spec).unwrap();
        let centre = inv.values()[1 << 11].re;
        // Periodic images of the x^{-2} tail shift the grid value slightly.
        assert!((centre - 3.0 / (2.0 * PI)).abs() < 1e-3);
    }

    #[test]
    fn smoothed_leg_matches_trapezoid_at_r1() {
        for u in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert_eq!(smoothstep(1, u), u);
        }
        for r in 2..8 {
            assert!((smoothstep(r, 0.5) - 0.5).abs() < 1e-14);
            assert!(smoothstep(r, 1e-3) < 4f64.powi(r as i32) * 1e-3f64.powi(r as i32));
        }
    }

    #[test]
    fn smoothed_leg_value_matches_inverse_transform() {
        let k = build_kernel(1, 2.0, 0.5, 4).unwrap();
        let g = GridBox::line(-100.0, 100.0, 1 << 12).unwrap();
        let sp = k.spatial_on(&g).unwrap();
        for idx in [2048, 2060, 2100, 2500] {
            let x = sp.coords(idx)[0];
            let (a, b) = (sp.values()[idx].re, k.value_1d(x));
            assert!((a - b).abs() < 1e-7, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn far_expansion_matches_quadrature() {
        for r in [1, 2, 4, 9] {
            let k = build_kernel(1, 2.0, 0.5, r).unwrap();
            for x in [20.0, 25.0, 60.0] {
                let far = k.value_far(x);
                let near = if r == 1 {
                    k.value_1d(x)
                } else {
                    let a = 1.0;
                    let gl = GaussLegendre::new(200);
                    (a * x).sin() / x / PI
                        + gl.integrate(1.0, 2.0, |t| k.transform_1d(t) * (t * x).cos()) / PI
                };
                assert!((far - near).abs() <= 1e-14 + 1e-10 * near.abs(), "r={r} x={x}");
            }
        }
    }

    #[test]
    fn product_kernel() {
        let k = build_kernel(2, 2.0, 0.5, 1).unwrap();
        for (a, b) in [(0.3, 1.7), (1.2, 1.5), (-1.9, 0.1)] {
            assert_eq!(k.transform(&[a, b]), k.transform_1d(a) * k.transform_1d(b));
        }
    }

    #[test]
    fn scaling() {
        let k = build_kernel(1, 2.0, 0.5, 1).unwrap();
        let id = scale(&k, 1.0).unwrap();
        assert_eq!(id.transform(&[1.7]), k.transform_1d(1.7));
        assert_eq!(id.value(&[0.4]), k.value_1d(0.4));
        let half = scale(&k, 0.5).unwrap();
        assert_eq!(half.band(), 4.0);
        assert_eq!(half.transform(&[3.0]), k.transform_1d(1.5));
        assert!(half.transform(&[3.9]) > 0.0 && half.transform(&[4.0]) == 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(build_kernel(1, 2.0, 1.0, 1).is_err());
        assert!(build_kernel(1, 2.0, 0.0, 1).is_err());
        assert!(build_kernel(1, -1.0, 0.5, 1).is_err());
        let k = build_kernel(1, 2.0, 0.5, 3).unwrap();
        let kn = scale(&k, 0.5).unwrap();
        let g = GridBox::line(-20.0, 20.0, 1 << 10).unwrap();
        assert!(kn.derivative_on(&g, &MultiIndex(vec![3])).is_err());
        assert!(kn.derivative_on(&g, &MultiIndex(vec![2])).is_ok());
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::all_of_order(2, 2).len(), 3);
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
        assert_eq!("1:0".parse::<MultiIndex>().unwrap(), MultiIndex(vec![1, 0]));
    }
}
