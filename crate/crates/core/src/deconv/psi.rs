//! `ψ_n = F^{-1}[K̃_n / h̃]` and `ψ_n* = F^{-1}[K̃_n / h̃_n*]`.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::Serialize;

use super::transfer::RegularizedTransfer;
use crate::error::{Error, Result};
use crate::kernels::ScaledKernel;
use crate::noise::NoiseModel;
use crate::numerics::quad::adaptive;
use crate::numerics::{inverse_fourier, GridBox, GridFunction};

/// A Fourier-ratio filter on a grid.
#[derive(Clone, Debug)]
pub struct Psi {
    /// `ψ̃` at the dual nodes of the grid.
    pub spectrum: GridFunction,
    pub spatial: GridFunction,
    /// `‖ψ̃‖₂` by quadrature.
    pub l2: f64,
}

impl Psi {
    /// Grid `L_1` norm of the spatial filter.
    pub fn l1(&self) -> f64 {
        self.spatial.values().iter().map(|v| v.norm()).sum::<f64>() * self.spatial.cell()
    }
}

/// Cube with `nodes` points per axis resolving twice the kernel band.
pub fn default_psi_grid(kn: &ScaledKernel, nodes: usize) -> Result<GridBox> {
    let d = kn.base().dim();
    let dx = std::f64::consts::PI / (2.0 * kn.band());
    let lo = -(nodes as f64) / 2.0 * dx;
    GridBox::with_spacing(vec![lo; d], vec![dx; d], vec![nodes; d])
}

fn check_dims(kn: &ScaledKernel, model: &NoiseModel, grid: &GridBox) -> Result<()> {
    if model.dim() != kn.base().dim() {
        return Err(Error::Structural(format!(
            "noise dimension {} does not match kernel dimension {}",
            model.dim(),
            kn.base().dim()
        )));
    }
    kn.check_grid(grid)
}

/// `∫ K̃(tb)² / den(t)² dt` over the kernel band of one axis.
fn ratio_sq_1d(kn: &ScaledKernel, den: impl Fn(f64) -> f64, mut breaks: Vec<f64>) -> Result<f64> {
    let band = kn.band();
    let flat = kn.base().rho() * band;
    breaks.extend([-band, -flat, 0.0, flat, band]);
    breaks.retain(|x| x.abs() <= band);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let base = kn.base();
    let b = kn.bandwidth();
    let f = |t: f64| {
        let k = base.transform_1d(t * b);
        if k == 0.0 {
            0.0
        } else {
            (k / den(t)).powi(2)
        }
    };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        // The flat part alone contributes at least `2·flat`.
        total += adaptive(f, w[0], w[1], 1e-13 * flat * (w[1] - w[0]) / band, 1e-10);
    }
    if !total.is_finite() {
        return Err(Error::NumericRange("‖ψ̃‖₂ overflows on the kernel band".into()));
    }
    Ok(total)
}

fn finish(kn: &ScaledKernel, grid: &GridBox, ratio: impl Fn(&[f64]) -> Result<Complex64>, l2: f64) -> Result<Psi> {
    let failure = RefCell::new(None);
    let spectrum = GridFunction::sample_frequency(grid.clone(), |t| {
        let k = kn.transform(t);
        if k == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match ratio(t) {
            Ok(v) => k * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let spatial = inverse_fourier(&spectrum)?;
    if spatial.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NumericRange("spatial ψ overflows".into()));
    }
    Ok(Psi { spectrum, spatial, l2 })
}

/// `ψ_n` for noise without roots in the kernel band.
pub fn psi(kn: &ScaledKernel, model: &NoiseModel, grid: &GridBox) -> Result<Psi> {
    check_dims(kn, model, grid)?;
    if model.is_oscillatory() {
        let zeros = model.zeros_in_band(kn.band())?;
        if !zeros.is_empty() {
            return Err(Error::MustRegularize { root: zeros.root(1) });
        }
    }
    let axis = ratio_sq_1d(kn, |t| model.abs_htilde_1d(t), Vec::new())?;
    let l2 = axis.powi(model.dim() as i32).sqrt();
    finish(
        kn,
        grid,
        |t| {
            let h = model.htilde(t);
            let v = h.inv();
            if h.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NumericRange(format!(
                    "1/h̃ overflows at t = {:?} inside the kernel band",
                    t
                )));
            }
            Ok(v)
        },
        l2,
    )
}

/// `ψ_n*` from a regularized transfer.
pub fn psi_star(kn: &ScaledKernel, transfer: &RegularizedTransfer, grid: &GridBox) -> Result<Psi> {
    let model = transfer.model();
    check_dims(kn, model, grid)?;
    if transfer.band_limit() < kn.band() {
        return Err(Error::domain(
            "M_n",
            format!("transfer band {} is narrower than the kernel band {}", transfer.band_limit(), kn.band()),
        ));
    }
    let l2 = if transfer.is_identity() {
        let axis = ratio_sq_1d(kn, |t| model.abs_htilde_1d(t), Vec::new())?;
        axis.powi(model.dim() as i32).sqrt()
    } else {
        ratio_sq_1d(kn, |t| transfer.eval_1d(t).norm(), transfer.breakpoints(kn.band()))?.sqrt()
    };
    finish(
        kn,
        grid,
        |t| {
            let h = transfer.eval(t);
            if h.norm() == 0.0 {
                return Err(Error::DivisionGuard(format!("h̃_n* vanishes at t = {t:?}")));
            }
            let v = h.inv();
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NumericRange(format!("1/h̃_n* overflows at t = {t:?}")));
            }
            Ok(v)
        },
        l2,
    )
}

/// `sup |F^{-1}[ψ̃ · den] − K_n|` on the grid.
fn identity_error(p: &Psi, kn: &ScaledKernel, den: impl Fn(&[f64]) -> Complex64) -> Result<f64> {
    let prod = p.spectrum.map_with_coords(|t, v| if v == Complex64::new(0.0, 0.0) { v } else { v * den(t) });
    let back = inverse_fourier(&prod)?;
    let k = kn.spatial_on(p.spatial.grid())?;
    Ok(back.sub(&k)?.sup_norm())
}

/// Grid error of `ψ_n * h = K_n`.
pub fn psi_identity_error(p: &Psi, kn: &ScaledKernel, model: &NoiseModel) -> Result<f64> {
    identity_error(p, kn, |t| model.htilde(t))
}

/// Grid error of `ψ_n* * h_n* = K_n`.
pub fn psi_star_identity_error(p: &Psi, kn: &ScaledKernel, transfer: &RegularizedTransfer) -> Result<f64> {
    identity_error(p, kn, |t| transfer.eval(t))
}

/// `‖ψ_n‖₁` on the grid against the integral and supremum forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct L1Report {
    pub b: f64,
    pub numeric: f64,
    /// `(∫_band |K̃(tb)|² |h̃|^{-2} dt)^{1/2}`.
    pub mid: f64,
    /// `sup_band |h̃|^{-1} · b^{-d/2}`.
    pub coarse: f64,
}

impl L1Report {
    pub fn ratio(&self) -> f64 {
        self.numeric / self.mid
    }
}

pub fn psi_l1_report(kn: &ScaledKernel, model: &NoiseModel, grid: &GridBox) -> Result<L1Report> {
    let p = psi(kn, model, grid)?;
    let d = model.dim();
    let inf = model.envelope_inf(&vec![kn.band(); d])?;
    Ok(L1Report {
        b: kn.bandwidth(),
        numeric: p.l1(),
        mid: p.l2,
        coarse: kn.bandwidth().powf(-(d as f64) / 2.0) / inf,
    })
}
