//! Zero-regularized transfer `h̃_n*` and the functional `S(M_n)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::BandwidthPlan;
use crate::error::{Error, Result};
use crate::noise::{ModelClass, NoiseFamily, NoiseModel};
use crate::numerics::quad::{bisect, GaussLegendre};

/// Regions around roots `1..=MATERIALIZED_REGIONS` are built explicitly;
/// further roots use the pointwise rule and a closed-form profile in `S`.
pub const MATERIALIZED_REGIONS: u64 = 4096;

/// `R_j = [lo, hi]` around the root `r_j`, on which `h̃_n* = threshold`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub index: i64,
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub threshold: f64,
    /// The threshold tops the lobe maximum, so the region fills the cell.
    pub saturated: bool,
}

impl Region {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Clone, Debug)]
pub struct RegularizedTransfer {
    model: NoiseModel,
    m_n: f64,
    v_n: f64,
    tilt: f64,
    period: f64,
    max_index: u64,
    regions: Vec<Region>,
}

impl RegularizedTransfer {
    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn band_limit(&self) -> f64 {
        self.m_n
    }

    /// Regions for positive root indices; negative ones mirror them.
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Number of positive roots inside `[0, M_n]`.
    pub fn root_count(&self) -> u64 {
        self.max_index
    }

    pub fn is_identity(&self) -> bool {
        self.max_index == 0
    }

    /// `v_{n,j} = v_n / |j|^{β+δ}`.
    pub fn threshold(&self, j: i64) -> f64 {
        self.v_n * (j.unsigned_abs() as f64).powf(-self.tilt)
    }

    /// Smallest threshold over the roots in band.
    pub fn min_threshold(&self) -> f64 {
        if self.max_index == 0 {
            return f64::INFINITY;
        }
        let last = self.threshold(self.max_index as i64);
        last.min(self.v_n)
    }

    /// Index of the nearest root; midpoints go to the lower index.
    fn nearest_index(&self, t: f64) -> i64 {
        (t / self.period - 0.5).ceil() as i64
    }

    /// `h̃_n*` at a point of `R^d`.
    pub fn eval(&self, t: &[f64]) -> Complex64 {
        if t.iter().any(|ti| ti.abs() > self.m_n) {
            return Complex64::new(0.0, 0.0);
        }
        if self.max_index == 0 {
            return self.model.htilde(t);
        }
        self.eval_1d(t[0])
    }

    pub fn eval_1d(&self, t: f64) -> Complex64 {
        if t.abs() > self.m_n {
            return Complex64::new(0.0, 0.0);
        }
        let h = self.model.htilde_1d(t);
        if self.max_index == 0 {
            return h;
        }
        let j = self.nearest_index(t);
        if j == 0 {
            return h;
        }
        let a = j.unsigned_abs();
        if a <= self.regions.len() as u64 {
            let r = &self.regions[a as usize - 1];
            let (lo, hi) = if j > 0 { (r.lo, r.hi) } else { (-r.hi, -r.lo) };
            if t >= lo && t <= hi {
                return Complex64::new(r.threshold, 0.0);
            }
            return h;
        }
        let v = self.threshold(j);
        if h.norm() <= v {
            Complex64::new(v, 0.0)
        } else {
            h
        }
    }

    /// Breakpoints of `h̃_n*` on `[-limit, limit]`: region edges and roots.
    pub fn breakpoints(&self, limit: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for r in &self.regions {
            for x in [r.lo, r.root, r.hi] {
                if x < limit {
                    out.push(x);
                    out.push(-x);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// `max |h̃|` on the half cell from `root` towards `root + side · half` by
/// golden-section search; the modulus is unimodal there.
fn half_cell_peak(model: &NoiseModel, root: f64, side: f64, half: f64) -> (f64, f64) {
    let g = |s: f64| model.abs_htilde_1d(root + side * s);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, half);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = g(d);
        }
    }
    let s = 0.5 * (a + b);
    // The peak may sit on the midpoint itself.
    if g(half) >= g(s) {
        (half, g(half))
    } else {
        (s, g(s))
    }
}

/// Region around `root`. A threshold at or above the lobe maximum fills the
/// whole cell; that is an error only where the cell meets the kernel band,
/// since `ψ̃*` divides by the threshold there.
fn build_region(
    model: &NoiseModel,
    j: i64,
    root: f64,
    period: f64,
    v: f64,
    kernel_band: f64,
) -> Result<Region> {
    let half = 0.5 * period;
    let mut ext = [0.0; 2];
    for (k, side) in [-1.0, 1.0].into_iter().enumerate() {
        let (s_peak, peak) = half_cell_peak(model, root, side, half);
        if v >= peak {
            if root - half < kernel_band {
                return Err(Error::DegenerateRegion { index: j, threshold: v, lobe_max: peak });
            }
            return Ok(Region {
                index: j,
                root,
                lo: root - half,
                hi: root + half,
                threshold: v,
                saturated: true,
            });
        }
        ext[k] = bisect(
            |s| model.abs_htilde_1d(root + side * s) - v,
            0.0,
            s_peak,
            1e-15 * period.max(root.abs()),
        );
    }
    Ok(Region { index: j, root, lo: root - ext[0], hi: root + ext[1], threshold: v, saturated: false })
}

/// Builds `h̃_n*` for the plan. Non-oscillatory models give the band-limited
/// `h̃` itself.
pub fn build_transfer(model: &NoiseModel, plan: &BandwidthPlan) -> Result<RegularizedTransfer> {
    if !(plan.m_n >= plan.kernel_band()) {
        return Err(Error::domain(
            "M_n",
            format!("band limit {} is below the kernel band {}", plan.m_n, plan.kernel_band()),
        ));
    }
    let ModelClass::Oscillatory { beta, .. } = model.class() else {
        return Ok(RegularizedTransfer {
            model: model.clone(),
            m_n: plan.m_n,
            v_n: plan.v_n,
            tilt: 0.0,
            period: f64::INFINITY,
            max_index: 0,
            regions: Vec::new(),
        });
    };
    if model.dim() != 1 {
        return Err(Error::Unsupported(
            "regularized transfer for oscillatory noise in d >= 2".into(),
        ));
    }
    if !(plan.v_n > 0.0) {
        return Err(Error::DivisionGuard(format!("threshold scale v_n = {}", plan.v_n)));
    }
    let zeros = model.zeros_in_band(plan.m_n)?;
    let mut tr = RegularizedTransfer {
        model: model.clone(),
        m_n: plan.m_n,
        v_n: plan.v_n,
        tilt: beta + plan.delta,
        period: zeros.period,
        max_index: zeros.max_index,
        regions: Vec::new(),
    };
    let count = tr.max_index.min(MATERIALIZED_REGIONS);
    tr.regions.reserve(count as usize);
    for j in 1..=count as i64 {
        let v = tr.threshold(j);
        tr.regions.push(build_region(model, j, zeros.root(j), tr.period, v, plan.kernel_band())?);
    }
    Ok(tr)
}

/// `∫_0^θ sin^k u du`.
fn sin_power_integral(k: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let mut even = theta;
    let mut odd = 1.0 - c;
    if k == 0 {
        return even;
    }
    if k == 1 {
        return odd;
    }
    let mut out = 0.0;
    for n in 2..=k {
        let prev = if n % 2 == 0 { even } else { odd };
        let nf = n as f64;
        out = -s.powi(n as i32 - 1) * c / nf + (nf - 1.0) / nf * prev;
        if n % 2 == 0 {
            even = out;
        } else {
            odd = out;
        }
    }
    out
}

/// Leading-order `∫_{R_x} (v − |h̃|)²` for a root at index `x` of
/// `uniform(m, λ)`, with `|h̃| ≈ |sin(s/λ)|^m (πx)^{-m}` across the cell.
fn far_region_square(m: u32, lambda: f64, v: f64, x: f64) -> f64 {
    let amp = (PI * x).powi(-(m as i32));
    let ratio = (v / amp).powf(1.0 / m as f64);
    let theta = if ratio >= 1.0 { 0.5 * PI } else { ratio.asin() };
    lambda
        * (2.0 * theta * v * v - 4.0 * v * amp * sin_power_integral(m, theta)
            + 2.0 * amp * amp * sin_power_integral(2 * m, theta))
}

/// `S(M_n) = (Σ_j ∫_{R_j} (v_{n,j} − |h̃|)²)^{1/2}` over both signs of `j`.
pub fn reg_s(tr: &RegularizedTransfer) -> f64 {
    if tr.max_index == 0 {
        return 0.0;
    }
    let gl = GaussLegendre::new(24);
    let mut near = 0.0;
    for r in &tr.regions {
        let hi = r.hi.min(tr.m_n);
        let sq = |t: f64| (r.threshold - tr.model.abs_htilde_1d(t)).powi(2);
        near += gl.integrate(r.lo, r.root.min(hi), sq);
        if hi > r.root {
            near += gl.integrate(r.root, hi, sq);
        }
    }
    let mut far = 0.0;
    let first = tr.regions.len() as u64;
    if tr.max_index > first {
        let NoiseFamily::Uniform { m, lambda } = tr.model.family() else {
            unreachable!("roots only for uniform sums");
        };
        let x0 = first as f64 + 0.5;
        let x1 = tr.max_index as f64 + 0.5;
        // Saturation where the threshold reaches the lobe envelope (πx)^{-m}.
        let x_sat = (PI.powi(m as i32) * tr.v_n).powf(-1.0 / (m as f64 - tr.tilt));
        let mut cuts = vec![x0];
        let mut x = x0;
        while x * 2.0 < x1 {
            x *= 2.0;
            if x_sat > cuts[cuts.len() - 1] && x_sat < x {
                cuts.push(x_sat);
            }
            cuts.push(x);
        }
        if x_sat > cuts[cuts.len() - 1] && x_sat < x1 {
            cuts.push(x_sat);
        }
        cuts.push(x1);
        for w in cuts.windows(2) {
            far += gl.integrate(w[0], w[1], |x| {
                far_region_square(m, lambda, tr.v_n * x.powf(-tr.tilt), x)
            });
        }
    }
    (2.0 * (near + far)).sqrt()
}
