use num_complex::Complex64;
use rustfft::FftDirection;

use super::fourier::dft_axis;
use super::grid::{Domain, GridBox, GridFunction};
use crate::error::{Error, Result};

/// Linear convolution `∫ f(x−y) g(y) dy` of two spatial grid functions with
/// equal spacing. Node `k` of the output sits at `lo_f + lo_g + k dx`; each
/// axis is zero-padded to the next power of two at or above `n_f + n_g`, so no
/// wrap-around occurs and the output covers the Minkowski sum of the boxes.
pub fn convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    if f.domain() != Domain::Spatial || g.domain() != Domain::Spatial {
        return Err(Error::Structural("convolve expects spatial functions".into()));
    }
    let (gf, gg) = (f.grid(), g.grid());
    if gf.dim() != gg.dim() {
        return Err(Error::Structural("dimension mismatch in convolve".into()));
    }
    let d = gf.dim();
    let mut lo = Vec::with_capacity(d);
    let mut dx = Vec::with_capacity(d);
    let mut n = Vec::with_capacity(d);
    for a in 0..d {
        let (sa, sb) = (gf.spacing(a), gg.spacing(a));
        if ((sa - sb) / sa).abs() > 1e-9 {
            return Err(Error::Structural(format!(
                "axis {a}: spacing mismatch {sa} vs {sb}"
            )));
        }
        lo.push(gf.lo(a) + gg.lo(a));
        dx.push(sa);
        n.push((gf.count(a) + gg.count(a)).next_power_of_two());
    }
    let out = GridBox::with_spacing(lo, dx, n.clone())?;

    let pf = pad(f, &out);
    let pg = pad(g, &out);
    let mut a = pf;
    let mut b = pg;
    for axis in 0..d {
        dft_axis(&mut a, &n, axis, FftDirection::Forward);
        dft_axis(&mut b, &n, axis, FftDirection::Forward);
    }
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    for axis in 0..d {
        dft_axis(&mut a, &n, axis, FftDirection::Inverse);
    }
    let scale = out.cell_volume() / out.len() as f64;
    let real = f.values().iter().all(|v| v.im == 0.0) && g.values().iter().all(|v| v.im == 0.0);
    for v in a.iter_mut() {
        *v *= scale;
        if real {
            v.im = 0.0;
        }
    }
    GridFunction::new(out, Domain::Spatial, a)
}

fn pad(f: &GridFunction, out: &GridBox) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); out.len()];
    for (flat, val) in f.values().iter().enumerate() {
        let idx = f.grid().unravel(flat);
        v[out.ravel(&idx)] = *val;
    }
    v
}
