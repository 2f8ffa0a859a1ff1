//! Ground-truth mixing densities with a recorded Hölder class, the forward
//! mixture `f_p = h * p`, and the observation sampler.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::MultiIndex;
use crate::noise::NoiseModel;
use crate::numerics::quad::adaptive;
use crate::numerics::{convolve, GridBox, GridFunction};
use crate::specstr::SpecString;

/// Nodes of the cdf table used for inverse-cdf sampling.
pub const CDF_NODES: usize = 1 << 16;

/// `q̃ = q + γ` with `γ ∈ (0, 1]` and modulus `w_q(δ) = L δ^γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessClass {
    pub q: u32,
    pub gamma: f64,
    pub l: f64,
}

impl SmoothnessClass {
    pub fn qtilde(&self) -> f64 {
        self.q as f64 + self.gamma
    }

    pub fn modulus(&self, delta: f64) -> f64 {
        self.l * delta.abs().powf(self.gamma)
    }

    /// Splits `q̃ > 0` into the largest integer `q < q̃` and `γ = q̃ − q`.
    pub fn split(qtilde: f64) -> Result<(u32, f64)> {
        if !(qtilde > 0.0 && qtilde.is_finite()) {
            return Err(Error::domain("qtilde", format!("must be positive, got {qtilde}")));
        }
        let q = (qtilde.ceil() - 1.0).max(0.0);
        Ok((q as u32, qtilde - q))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `exp(−1/(1 − u²))` on `|u| < 1`.
    Bump,
    /// `(1 − u²)₊^{q̃}`: exact Hölder order `q̃` at `u = ±1`.
    Spline { qtilde: f64 },
    /// Equal mixture of two bumps centred at `u = ±0.45` with half-width `0.55`.
    TwoBump,
}

/// A 1-d profile rescaled to `[lo, hi]`, normalized, and taken as a product
/// over `d` axes.
#[derive(Clone, Debug)]
pub struct MixingDensity {
    profile: Profile,
    lo: f64,
    hi: f64,
    d: usize,
    norm: f64,
    smoothness: SmoothnessClass,
}

/// Polynomial coefficients, lowest degree first.
type Poly = Vec<f64>;

fn poly_eval(p: &Poly, u: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn poly_deriv(a: &Poly) -> Poly {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

/// Numerators `N_s` with `d^s/du^s e^{g} = e^{g} N_s(u) / (1 − u²)^{2s}`,
/// `g = −1/(1 − u²)`.
fn bump_numerators(s_max: u32) -> Vec<Poly> {
    let d2: Poly = vec![1.0, 0.0, -2.0, 0.0, 1.0];
    let dd: Poly = vec![1.0, 0.0, -1.0];
    let mut out = vec![vec![1.0]];
    for s in 0..s_max {
        let n = &out[s as usize];
        let a = poly_mul(&vec![0.0, -2.0], n);
        let b = poly_mul(&d2, &poly_deriv(n));
        let c = poly_mul(&poly_mul(&vec![0.0, 4.0 * s as f64], &dd), n);
        out.push(poly_add(&poly_add(&a, &b), &c));
    }
    out
}

fn bump_deriv(u: f64, s: u32) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let dd = 1.0 - u * u;
    let e = (-1.0 / dd).exp();
    if e == 0.0 {
        return 0.0;
    }
    let n = &bump_numerators(s)[s as usize];
    e * poly_eval(n, u) / dd.powi(2 * s as i32)
}

/// `d^s/du^s (1 − u²)^a` inside `|u| < 1`, zero outside.
fn spline_deriv(u: f64, a: f64, s: u32) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    // Leibniz on (1 − u)^a (1 + u)^a.
    let falling = |k: u32| (0..k).map(|i| a - i as f64).product::<f64>();
    let mut total = 0.0;
    let mut binom = 1.0;
    for k in 0..=s {
        let left = if k % 2 == 0 { 1.0 } else { -1.0 } * falling(k) * (1.0 - u).powf(a - k as f64);
        let right = falling(s - k) * (1.0 + u).powf(a - (s - k) as f64);
        total += binom * left * right;
        binom *= (s - k) as f64 / (k + 1) as f64;
    }
    total
}

impl Profile {
    /// Unnormalized `s`-th derivative in the unit coordinate `u`.
    fn deriv_unit(&self, u: f64, s: u32) -> f64 {
        match *self {
            Profile::Bump => bump_deriv(u, s),
            Profile::Spline { qtilde } => spline_deriv(u, qtilde, s),
            Profile::TwoBump => {
                let w = 0.55f64;
                let scale = w.powi(-(s as i32));
                0.5 * scale * (bump_deriv((u + 0.45) / w, s) + bump_deriv((u - 0.45) / w, s))
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Profile::Bump => "bump",
            Profile::Spline { .. } => "spline",
            Profile::TwoBump => "twobump",
        }
    }
}

impl MixingDensity {
    /// `qtilde` is the recorded class; for the spline it is also the shape.
    pub fn new(profile: Profile, lo: f64, hi: f64, d: usize, qtilde: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("d", "dimension must be positive"));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::domain("target", format!("support [{lo}, {hi}] is not an interval")));
        }
        let (q, gamma) = SmoothnessClass::split(qtilde)?;
        let mut p = MixingDensity {
            profile,
            lo,
            hi,
            d,
            norm: 1.0,
            smoothness: SmoothnessClass { q, gamma, l: 0.0 },
        };
        let mass = adaptive(|u| profile.deriv_unit(u, 0), -1.0, 1.0, 1e-14, 1e-13) * p.half_width();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::domain("target", "profile cannot be normalized"));
        }
        p.norm = 1.0 / mass;
        p.smoothness.l = p.measure_modulus_constant();
        Ok(p)
    }

    /// Parses `bump`, `spline(qtilde=2)`, `twobump`; `qtilde` on the bump
    /// families only sets the recorded class.
    pub fn parse(text: &str, lo: f64, hi: f64, d: usize, origin: &str) -> Result<Self> {
        let s = SpecString::parse(text, origin)?;
        s.only(&["qtilde", "q"])?;
        let key = if s.params.contains_key("q") { "q" } else { "qtilde" };
        let qtilde = s.f64_or(key, 2.0)?;
        let profile = match s.name.as_str() {
            "bump" | "smooth_bump" => Profile::Bump,
            "spline" | "spline_holder" => Profile::Spline { qtilde },
            "twobump" | "two_bump" => Profile::TwoBump,
            other => return Err(Error::domain(origin, format!("unknown target `{other}`"))),
        };
        MixingDensity::new(profile, lo, hi, d, qtilde).map_err(|e| match e {
            Error::Domain { message, .. } => Error::domain(origin, message),
            e => e,
        })
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn smoothness(&self) -> SmoothnessClass {
        self.smoothness
    }

    /// Same profile in another dimension.
    pub fn with_dim(&self, d: usize) -> Result<Self> {
        let mut p = self.clone();
        if d == 0 {
            return Err(Error::domain("d", "dimension must be positive"));
        }
        p.d = d;
        Ok(p)
    }

    /// Normalized 1-d density's `s`-th derivative.
    pub fn deriv_1d(&self, y: f64, s: u32) -> f64 {
        let w = self.half_width();
        let u = (y - self.center()) / w;
        self.norm * self.profile.deriv_unit(u, s) / w.powi(s as i32)
    }

    pub fn value_1d(&self, y: f64) -> f64 {
        self.deriv_1d(y, 0)
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        y.iter().map(|&v| self.value_1d(v)).product()
    }

    /// `∂^s p` for a multi-index `s`, product over axes.
    pub fn derivative(&self, y: &[f64], s: &MultiIndex) -> f64 {
        y.iter().zip(&s.0).map(|(&v, &k)| self.deriv_1d(v, k)).product()
    }

    pub fn mean_1d(&self) -> f64 {
        adaptive(|y| y * self.value_1d(y), self.lo, self.hi, 1e-14, 1e-12)
    }

    /// `sup |p^{(q)}(y+δ) − p^{(q)}(y)| / δ^γ` over a dense `(y, δ)` grid,
    /// padded by 5%. Uses the 1-d profile; the product class is tracked per
    /// axis.
    fn measure_modulus_constant(&self) -> f64 {
        let q = self.smoothness.q;
        let gamma = self.smoothness.gamma;
        let w = self.half_width();
        let ys: Vec<f64> = (0..=2400)
            .map(|i| self.lo - 0.1 * w + i as f64 * 2.2 * w / 2400.0)
            .collect();
        let vals: Vec<f64> = ys.iter().map(|&y| self.deriv_1d(y, q)).collect();
        let mut best: f64 = 0.0;
        // Neighbouring-node pairs at every lag give δ from the spacing to the
        // full width.
        let step = ys[1] - ys[0];
        let mut lag = 1usize;
        while lag < ys.len() {
            let delta = lag as f64 * step;
            let denom = delta.powf(gamma);
            for i in 0..ys.len() - lag {
                best = best.max((vals[i + lag] - vals[i]).abs() / denom);
            }
            lag = (lag as f64 * 1.3).ceil() as usize;
        }
        // Resolve the scale below the grid spacing at the boundary and at
        // the point of largest higher derivative.
        let mut probes = vec![self.lo, self.hi];
        if let Some(i) = (0..vals.len()).max_by(|&a, &b| {
            let da = self.deriv_1d(ys[a], q + 1).abs();
            let db = self.deriv_1d(ys[b], q + 1).abs();
            da.total_cmp(&db)
        }) {
            probes.push(ys[i]);
        }
        for &y0 in &probes {
            let mut delta = step;
            for _ in 0..30 {
                delta *= 0.6;
                let denom = delta.powf(gamma);
                for y in [y0 - delta, y0] {
                    best = best.max((self.deriv_1d(y + delta, q) - self.deriv_1d(y, q)).abs() / denom);
                }
            }
        }
        best * 1.05
    }

    /// `p` sampled on a box.
    pub fn sample_on(&self, grid: &GridBox) -> GridFunction {
        GridFunction::sample(grid.clone(), |y| self.value(y))
    }

    /// Box with spacing `dx` whose nodes are integer multiples of `dx`,
    /// covering the support plus `pad` on each side.
    pub fn aligned_grid(&self, dx: f64, pad: f64) -> Result<GridBox> {
        let k_lo = ((self.lo - pad) / dx).floor() as i64;
        let k_hi = ((self.hi + pad) / dx).ceil() as i64;
        let count = ((k_hi - k_lo + 1) as usize).next_power_of_two().max(16);
        GridBox::with_spacing(vec![k_lo as f64 * dx; self.d], vec![dx; self.d], vec![count; self.d])
    }

    /// Inverse-cdf sampler on `CDF_NODES` nodes with linear interpolation.
    pub fn sampler(&self) -> InverseCdf {
        let n = CDF_NODES;
        let h = (self.hi - self.lo) / (n - 1) as f64;
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        let mut prev = self.value_1d(self.lo);
        cdf.push(0.0);
        for i in 1..n {
            let v = self.value_1d(self.lo + i as f64 * h);
            acc += 0.5 * (prev + v) * h;
            cdf.push(acc);
            prev = v;
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        InverseCdf { lo: self.lo, h, cdf }
    }

    pub fn spec_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MixingDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(qtilde={})", self.profile.name(), self.smoothness.qtilde())
    }
}

/// Tabulated cdf on equispaced nodes.
#[derive(Clone, Debug)]
pub struct InverseCdf {
    lo: f64,
    h: f64,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.lo + (i as f64 - 1.0 + frac.clamp(0.0, 1.0)) * self.h
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

/// `p`, `h` and `f_p = h * p` on compatible boxes.
#[derive(Clone, Debug)]
pub struct Forward {
    pub p: GridFunction,
    pub h: GridFunction,
    pub f: GridFunction,
}

/// `f_p = h * p` by linear convolution with spacing `dx` per axis.
pub fn forward_density(p: &MixingDensity, h: &NoiseModel, dx: f64) -> Result<Forward> {
    if p.dim() != h.dim() {
        return Err(Error::Structural("target and noise dimensions differ".into()));
    }
    if !(dx > 0.0) {
        return Err(Error::domain("dx", "spacing must be positive"));
    }
    let pg = p.sample_on(&p.aligned_grid(dx, dx)?);
    let hg = h.sample_on_grid(&vec![dx; p.dim()])?;
    let f = convolve(&pg, &hg)?;
    Ok(Forward { p: pg, h: hg, f })
}

/// `n` draws of `X = Y + ε`, row-major `n × d`.
pub fn sample_mixture<R: Rng + ?Sized>(
    p: &MixingDensity,
    h: &NoiseModel,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("n", "need at least one draw"));
    }
    if p.dim() != h.dim() {
        return Err(Error::Structural("target and noise dimensions differ".into()));
    }
    let inv = p.sampler();
    let mut y: Vec<f64> = (0..n * p.dim()).map(|_| inv.draw(rng)).collect();
    let eps = h.sample(n, rng);
    for (yi, e) in y.iter_mut().zip(eps) {
        *yi += e;
    }
    Ok(y)
}

/// Checks `support(p) ⊂ support(f_p)` on the grid: every node where `p`
/// exceeds `tol` must carry `f_p > 0`. Only meaningful when `0 ∈ support(h)`.
pub fn check_containment(fw: &Forward, tol: f64) -> Result<bool> {
    let fgrid = fw.f.grid();
    for (i, v) in fw.p.values().iter().enumerate() {
        if v.re <= tol {
            continue;
        }
        let y = fw.p.coords(i);
        let mut idx = Vec::with_capacity(y.len());
        for (a, &ya) in y.iter().enumerate() {
            let k = ((ya - fgrid.lo(a)) / fgrid.spacing(a)).round();
            if k < 0.0 || k as usize >= fgrid.count(a) {
                return Ok(false);
            }
            idx.push(k as usize);
        }
        if fw.f.values()[fgrid.ravel(&idx)].re <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}
