use super::{FlatTopKernel, MultiIndex};

/// Half-width of the quadrature window.
const WINDOW: f64 = 200.0;
const STEP: f64 = 0.05;

/// One row of a moment report.
#[derive(Clone, Debug)]
pub struct MomentEntry {
    /// `"0"`, `"2"`, `"1:1"` for moments; `"tail_q"` for the integrability row.
    pub label: String,
    pub value: f64,
    pub target: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct MomentReport {
    pub entries: Vec<MomentEntry>,
    pub decay_exponent: f64,
    pub q: u32,
    pub tol: f64,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Smooth cutoff: 1 on `|z| <= 1/2`, 0 for `|z| >= 1`, `C^∞` in between.
fn window(z: f64) -> f64 {
    let a = z.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * a - 1.0;
    let e = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    e(1.0 - s) / (e(1.0 - s) + e(s))
}

/// One-dimensional windowed moments `∫ x^k K(x) W(x/L) dx` for `k = 0..=q_max`.
///
/// The smooth window makes the integrals converge for every leg order, and
/// because `K` is band-limited the equispaced rule is exact up to the window's
/// spectral tail. Symmetric nodes are paired so odd moments cancel exactly.
fn windowed_moments(k: &FlatTopKernel, q_max: u32) -> (Vec<f64>, f64) {
    let n = (WINDOW / STEP).round() as usize;
    let mut m = vec![0.0; q_max as usize + 1];
    let mut tail = 0.0;
    let q = q_max as i32;
    let k0 = k.value_1d(0.0);
    m[0] = k0 * STEP;
    for i in 1..=n {
        let x = i as f64 * STEP;
        let w = window(x / WINDOW) * STEP;
        if w == 0.0 {
            continue;
        }
        let kv = k.value_1d(x);
        let mut xp = 1.0;
        for (p, slot) in m.iter_mut().enumerate() {
            let pos = xp * kv * w;
            let neg = if p % 2 == 0 { pos } else { -pos };
            *slot += pos + neg;
            xp *= x;
        }
        tail += 2.0 * (x.powi(q) + x.powi(q + 1)) * kv.abs() * w;
    }
    (m, tail)
}

/// Moments of `K` up to order `q_max`. Order 0 must be 1 and every higher
/// moment 0 within `tol`. The last entry is `∫(|x|^q + |x|^{q+1})|K|` with
/// `q = q_max`; it passes when the decay exponent `r + 1` exceeds `q + 2`.
pub fn verify_moments(k: &FlatTopKernel, q_max: u32, tol: f64) -> MomentReport {
    let (m1, tail1) = windowed_moments(k, q_max);
    let d = k.dim();
    let mut entries = Vec::new();
    for order in 0..=q_max {
        for s in MultiIndex::all_of_order(d, order) {
            let value: f64 = s.0.iter().map(|&si| m1[si as usize]).product();
            let target = if order == 0 { 1.0 } else { 0.0 };
            let limit = if order == 0 { 1e-6 } else { tol };
            entries.push(MomentEntry {
                label: s.to_string(),
                value,
                target,
                pass: (value - target).abs() <= limit,
            });
        }
    }
    let integrable = k.decay_exponent() > q_max as f64 + 2.0;
    let abs_mass: f64 = windowed_moments(k, 0).1;
    // Product kernel: the d-fold integral is bounded by the 1-d tail times the
    // remaining axes' absolute masses.
    let tail = tail1 * abs_mass.powi(d as i32 - 1);
    entries.push(MomentEntry {
        label: format!("tail_{q_max}"),
        value: if integrable { tail } else { f64::INFINITY },
        target: f64::NAN,
        pass: integrable,
    });
    MomentReport {
        entries,
        decay_exponent: k.decay_exponent(),
        q: q_max,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::build_kernel;

    #[test]
    fn trapezoid_mass_and_moments() {
        let k = build_kernel(1, 2.0, 0.5, 1).unwrap();
        let r = verify_moments(&k, 2, 1e-3);
        assert!((r.entries[0].value - 1.0).abs() < 1e-6, "{}", r.entries[0].value);
        assert_eq!(r.entries[1].value, 0.0);
        assert!(r.entries[2].value.abs() < 1e-3, "{}", r.entries[2].value);
        // The trapezoid's x^{-2} tail is not integrable against |x|^q.
        assert!(!r.entries.last().unwrap().pass);
        assert!(!r.passed());
    }

    #[test]
    fn smoothed_leg_passes_order_six() {
        let k = build_kernel(1, 2.0, 0.5, 9).unwrap();
        let r = verify_moments(&k, 6, 1e-3);
        for e in &r.entries {
            assert!(e.pass, "{} = {}", e.label, e.value);
        }
    }

    #[test]
    fn window_shape() {
        assert_eq!(window(0.3), 1.0);
        assert_eq!(window(1.2), 0.0);
        assert!((window(0.75) - 0.5).abs() < 1e-15);
    }
}
