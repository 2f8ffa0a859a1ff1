//! Grid approximation of the continuous transform `F(t) = ∫ e^{-itx} f(x) dx`.
//!
//! On one axis with nodes `x_k = lo + k dx` and `t_j = (j - n/2) dt`,
//! `dt = 2π / (n dx)`:
//!
//! ```text
//! F_j = dx · e^{-i t_j lo} · Σ_k f_k (-1)^k e^{-2πi jk/n}
//! f_k = dt/(2π) · (-1)^k · Σ_j F_j e^{i t_j lo} e^{2πi jk/n}
//! ```
//!
//! The pair is an exact inverse on the grid. Higher dimensions apply the same
//! map along every axis.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::grid::{Domain, GridBox, GridFunction};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized DFT along one axis of a row-major array.
pub(crate) fn dft_axis(values: &mut [Complex64], counts: &[usize], axis: usize, dir: FftDirection) {
    let n = counts[axis];
    let inner: usize = counts[axis + 1..].iter().product();
    let outer: usize = counts[..axis].iter().product();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir));
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            if inner == 1 {
                let slice = &mut values[base..base + n];
                fft.process_with_scratch(slice, &mut scratch);
                continue;
            }
            for k in 0..n {
                line[k] = values[base + k * inner];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for k in 0..n {
                values[base + k * inner] = line[k];
            }
        }
    }
}

/// Multiplies every sample by a per-axis factor `w[a][index along a]`.
fn apply_axis_factors(values: &mut [Complex64], counts: &[usize], factors: &[Vec<Complex64>]) {
    let d = counts.len();
    let mut idx = vec![0usize; d];
    for v in values.iter_mut() {
        let mut w = Complex64::new(1.0, 0.0);
        for a in 0..d {
            w *= factors[a][idx[a]];
        }
        *v *= w;
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn forward_factors(grid: &GridBox) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let mut pre = Vec::with_capacity(grid.dim());
    let mut post = Vec::with_capacity(grid.dim());
    for a in 0..grid.dim() {
        let n = grid.count(a);
        let dx = grid.spacing(a);
        let lo = grid.lo(a);
        pre.push((0..n).map(|k| Complex64::new(sign(k), 0.0)).collect());
        post.push(
            (0..n)
                .map(|j| Complex64::from_polar(dx, -grid.frequency_node(a, j) * lo))
                .collect(),
        );
    }
    (pre, post)
}

fn inverse_factors(grid: &GridBox) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let mut pre = Vec::with_capacity(grid.dim());
    let mut post = Vec::with_capacity(grid.dim());
    for a in 0..grid.dim() {
        let n = grid.count(a);
        let dt = grid.frequency_spacing(a);
        let lo = grid.lo(a);
        pre.push(
            (0..n)
                .map(|j| Complex64::from_polar(1.0, grid.frequency_node(a, j) * lo))
                .collect(),
        );
        post.push(
            (0..n)
                .map(|k| Complex64::new(sign(k) * dt / (2.0 * PI), 0.0))
                .collect(),
        );
    }
    (pre, post)
}

pub fn fourier(f: &GridFunction) -> Result<GridFunction> {
    if f.domain() != Domain::Spatial {
        return Err(Error::Structural("fourier expects a spatial function".into()));
    }
    let grid = f.grid().clone();
    let mut v = f.values().to_vec();
    let (pre, post) = forward_factors(&grid);
    apply_axis_factors(&mut v, grid.counts(), &pre);
    for a in 0..grid.dim() {
        dft_axis(&mut v, grid.counts(), a, FftDirection::Forward);
    }
    apply_axis_factors(&mut v, grid.counts(), &post);
    GridFunction::new(grid, Domain::Frequency, v)
}

pub fn inverse_fourier(big_f: &GridFunction) -> Result<GridFunction> {
    if big_f.domain() != Domain::Frequency {
        return Err(Error::Structural(
            "inverse_fourier expects a frequency-domain function".into(),
        ));
    }
    let grid = big_f.grid().clone();
    let mut v = big_f.values().to_vec();
    let (pre, post) = inverse_factors(&grid);
    apply_axis_factors(&mut v, grid.counts(), &pre);
    for a in 0..grid.dim() {
        dft_axis(&mut v, grid.counts(), a, FftDirection::Inverse);
    }
    apply_axis_factors(&mut v, grid.counts(), &post);
    GridFunction::new(grid, Domain::Spatial, v)
}

/// Constant `c` with `‖f‖₂ = c · ‖F‖₂` under this convention, `(2π)^{-d/2}`.
pub fn parseval_constant(d: usize) -> f64 {
    (2.0 * PI).powf(-(d as f64) / 2.0)
}

/// Spatial function whose transform is `multiplier(t) · fourier(f)(t)`.
pub fn apply_multiplier(
    f: &GridFunction,
    multiplier: impl Fn(&[f64]) -> Complex64,
) -> Result<GridFunction> {
    let spec = fourier(f)?;
    let filtered = spec.map_with_coords(|t, v| v * multiplier(t));
    inverse_fourier(&filtered)
}
