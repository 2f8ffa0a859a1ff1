use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance on the mass of a sampled density.
pub const EPS_MASS: f64 = 1e-3;

/// Uniform closed-open box grid: node `k` on axis `a` sits at `lo[a] + k * dx[a]`
/// with `dx[a] = (hi[a] - lo[a]) / n[a]`, so `hi` itself is never sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct GridBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != n.len() {
            return Err(Error::Structural(format!(
                "grid box needs matching non-empty bounds and counts, got {}/{}/{}",
                lo.len(),
                hi.len(),
                n.len()
            )));
        }
        for a in 0..lo.len() {
            if !(lo[a].is_finite() && hi[a].is_finite() && lo[a] < hi[a]) {
                return Err(Error::Structural(format!(
                    "axis {a}: need finite lo < hi, got [{}, {})",
                    lo[a], hi[a]
                )));
            }
            if n[a] < 16 || !n[a].is_power_of_two() {
                return Err(Error::Structural(format!(
                    "axis {a}: point count must be a power of two >= 16, got {}",
                    n[a]
                )));
            }
        }
        Ok(GridBox { lo, hi, n })
    }

    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        GridBox::new(vec![lo], vec![hi], vec![n])
    }

    /// Same interval and count on every axis.
    pub fn cube(d: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        GridBox::new(vec![lo; d], vec![hi; d], vec![n; d])
    }

    /// Box with given origin and spacing; `hi = lo + n * dx`.
    pub fn with_spacing(lo: Vec<f64>, dx: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let hi = lo
            .iter()
            .zip(&dx)
            .zip(&n)
            .map(|((l, h), k)| l + h * *k as f64)
            .collect();
        GridBox::new(lo, hi, n)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn count(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn counts(&self) -> &[usize] {
        &self.n
    }

    pub fn lows(&self) -> &[f64] {
        &self.lo
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.n[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, axis: usize, k: usize) -> f64 {
        self.lo[axis] + k as f64 * self.spacing(axis)
    }

    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|k| self.node(axis, k)).collect()
    }

    /// Frequency spacing `2π / (n dx)`.
    pub fn frequency_spacing(&self, axis: usize) -> f64 {
        2.0 * PI / (self.n[axis] as f64 * self.spacing(axis))
    }

    /// Frequency node `t_j = (j - n/2) dt`; `j = n/2` is `t = 0`.
    pub fn frequency_node(&self, axis: usize, j: usize) -> f64 {
        (j as f64 - (self.n[axis] / 2) as f64) * self.frequency_spacing(axis)
    }

    pub fn frequency_nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|j| self.frequency_node(axis, j)).collect()
    }

    pub fn frequency_cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.frequency_spacing(a)).product()
    }

    /// Largest frequency magnitude representable on this grid, `π / dx`.
    pub fn nyquist(&self, axis: usize) -> f64 {
        PI / self.spacing(axis)
    }

    /// Row-major multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.n).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub(crate) fn same_shape(&self, other: &GridBox) -> bool {
        const TOL: f64 = 1e-12;
        if self.n != other.n {
            return false;
        }
        (0..self.dim()).all(|a| {
            let scale = self.hi[a].abs().max(self.lo[a].abs()).max(1.0);
            (self.lo[a] - other.lo[a]).abs() <= TOL * scale
                && (self.hi[a] - other.hi[a]).abs() <= TOL * scale
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Spatial,
    Frequency,
}

/// Samples of a function on a [`GridBox`]. The box is always the spatial box;
/// frequency-domain values live on the dual nodes derived from it, which keeps
/// the spatial origin available for the transform phase.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: GridBox,
    domain: Domain,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: GridBox, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structural(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction {
            grid,
            domain,
            values,
        })
    }

    pub fn from_real(grid: GridBox, domain: Domain, values: Vec<f64>) -> Result<Self> {
        GridFunction::new(
            grid,
            domain,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn zeros(grid: GridBox, domain: Domain) -> Self {
        let n = grid.len();
        GridFunction {
            grid,
            domain,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Samples a real function at the spatial nodes.
    pub fn sample(grid: GridBox, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|flat| {
                grid.fill_coords(flat, Domain::Spatial, &mut x);
                Complex64::new(f(&x), 0.0)
            })
            .collect();
        GridFunction {
            grid,
            domain: Domain::Spatial,
            values,
        }
    }

    /// Samples a complex function at the frequency nodes of `grid`.
    pub fn sample_frequency(grid: GridBox, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut t = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|flat| {
                grid.fill_coords(flat, Domain::Frequency, &mut t);
                f(&t)
            })
            .collect();
        GridFunction {
            grid,
            domain: Domain::Frequency,
            values,
        }
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Node coordinates on `axis` for this function's domain.
    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        match self.domain {
            Domain::Spatial => self.grid.nodes(axis),
            Domain::Frequency => self.grid.frequency_nodes(axis),
        }
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.grid.fill_coords(flat, self.domain, &mut x);
        x
    }

    /// Cell volume in this function's domain.
    pub fn cell(&self) -> f64 {
        match self.domain {
            Domain::Spatial => self.grid.cell_volume(),
            Domain::Frequency => self.grid.frequency_cell_volume(),
        }
    }

    /// Riemann sum of the real part; equals the trapezoid rule for functions
    /// that vanish at the box edges.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|c| c.re).sum::<f64>() * self.cell()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise map that also sees node coordinates.
    pub fn map_with_coords(&self, f: impl Fn(&[f64], Complex64) -> Complex64) -> Self {
        let mut x = vec![0.0; self.dim()];
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, &v)| {
                self.grid.fill_coords(flat, self.domain, &mut x);
                f(&x, v)
            })
            .collect();
        GridFunction {
            grid: self.grid.clone(),
            domain: self.domain,
            values,
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(GridFunction {
            grid: self.grid.clone(),
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub(crate) fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::Structural("domain tags differ".into()));
        }
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::Structural(format!(
                "grid boxes differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// Copies a spatial function onto a larger box whose nodes coincide with
    /// its own; nodes outside the source are zero.
    pub fn embed_into(&self, target: &GridBox) -> Result<Self> {
        if self.domain != Domain::Spatial {
            return Err(Error::Structural("only spatial functions embed".into()));
        }
        if target.dim() != self.dim() {
            return Err(Error::Structural("dimension mismatch in embed".into()));
        }
        let d = self.dim();
        let mut offset = vec![0usize; d];
        for a in 0..d {
            let dx = self.grid.spacing(a);
            if ((target.spacing(a) - dx) / dx).abs() > 1e-9 {
                return Err(Error::Structural(format!("axis {a}: spacing mismatch in embed")));
            }
            let shift = (self.grid.lo(a) - target.lo(a)) / dx;
            let k = shift.round();
            if (shift - k).abs() > 1e-6 || k < 0.0 {
                return Err(Error::Structural(format!(
                    "axis {a}: source nodes do not align with the target box"
                )));
            }
            offset[a] = k as usize;
            if offset[a] + self.grid.count(a) > target.count(a) {
                return Err(Error::Structural(format!(
                    "axis {a}: source does not fit in the target box"
                )));
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        let mut tidx = vec![0usize; d];
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.grid.unravel(flat);
            for a in 0..d {
                tidx[a] = idx[a] + offset[a];
            }
            out[target.ravel(&tidx)] = *v;
        }
        GridFunction::new(target.clone(), Domain::Spatial, out)
    }

    /// Checks the density contract: nonnegative up to `eps` and mass within `eps`.
    pub fn check_density(&self, eps: f64) -> Result<()> {
        let min = self.values.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -eps {
            return Err(Error::domain("density", format!("negative sample {min:e}")));
        }
        let m = self.mass();
        if (m - 1.0).abs() > eps {
            return Err(Error::domain("density", format!("mass {m} outside 1 ± {eps}")));
        }
        Ok(())
    }
}

impl GridBox {
    pub(crate) fn fill_coords(&self, mut flat: usize, domain: Domain, out: &mut [f64]) {
        for a in (0..self.dim()).rev() {
            let k = flat % self.n[a];
            flat /= self.n[a];
            out[a] = match domain {
                Domain::Spatial => self.node(a, k),
                Domain::Frequency => self.frequency_node(a, k),
            };
        }
    }
}
