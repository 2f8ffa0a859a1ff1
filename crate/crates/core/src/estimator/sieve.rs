use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::numerics::quad::{adaptive, GaussLegendre};
use crate::numerics::{convolve, GridBox, GridFunction};

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| adaptive(bump, -1.0, 1.0, 1e-15, 1e-14))
}

/// Transform of the unit-mass bump on `[-1, 1]` at frequency `w`.
fn bump_transform(w: f64) -> f64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(96));
    // Four panels keep the rule resolved for |w| up to a few hundred.
    let panels = 4 + (w.abs() / 20.0).ceil() as usize;
    let h = 2.0 / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let a = -1.0 + k as f64 * h;
        s += rule.integrate(a, a + h, |u| bump(u) * (w * u).cos());
    }
    s / bump_mass()
}

/// `p̂ = Σ w_i φ_s(y − c_i)` with `φ_s` the unit-mass bump of half-width `s`.
#[derive(Clone, Debug)]
pub struct SieveMixing {
    pub centers: Vec<f64>,
    pub weights: Vec<f64>,
    pub width: f64,
}

impl SieveMixing {
    pub fn value(&self, y: f64) -> f64 {
        let norm = 1.0 / (self.width * bump_mass());
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * bump((y - c) / self.width))
            .sum::<f64>()
            * norm
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn transform(&self, t: f64) -> Complex64 {
        let a = bump_transform(t * self.width);
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| Complex64::from_polar(w * a, -t * c))
            .sum()
    }

    pub fn sample_on(&self, grid: &GridBox) -> GridFunction {
        GridFunction::sample(grid.clone(), |y| self.value(y[0]))
    }

    /// Support of `p̂` including every atom.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.centers.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo - self.width, hi + self.width)
    }
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Number of atoms `J`.
    pub nodes: usize,
    /// Atom half-width as a multiple of the center spacing.
    pub width_factor: f64,
    /// Frequency window `[-band, band]` of the criterion.
    pub band: f64,
    /// Split point of the two Gauss–Legendre panels, as a fraction of `band`.
    pub split: f64,
    /// Gauss–Legendre nodes per panel on `t >= 0`.
    pub quad_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            nodes: 40,
            width_factor: 1.5,
            band: 2.0,
            split: 0.5,
            quad_nodes: 64,
            tol: 1e-10,
            max_iter: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub mixing: SieveMixing,
    /// `h * p̂` on a grid with the requested spacing.
    pub f_hat: GridFunction,
    /// `p̂` on the grid it was convolved from.
    pub p_hat: GridFunction,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after each projected-gradient iteration, starting value first.
    pub trace: Vec<f64>,
}

/// Euclidean projection onto `{w >= 0, Σw = 1}` by sorting.
pub fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    // Renormalize away the rounding in the threshold.
    let s: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= s;
    }
    w
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
fn power_iteration(g: &[Vec<f64>]) -> f64 {
    let n = g.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = g.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-12 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Characteristic-function least squares over the sieve:
/// `Q(w) = ∫_{-T}^{T} |Σ w_i ã_i(t) h̃(t) − φ_n(t)|² dt = wᵀGw − 2bᵀw + c`,
/// where `φ_n` is the empirical characteristic function of the samples.
#[derive(Clone, Debug)]
pub struct SieveProblem {
    pub centers: Vec<f64>,
    pub width: f64,
    g: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: f64,
}

impl SieveProblem {
    pub fn new(samples: &[f64], h: &NoiseModel, support: (f64, f64), opts: &FitOptions) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("samples", "need at least one sample"));
        }
        if h.dim() != 1 {
            return Err(Error::Unsupported("sieve fit is one-dimensional".into()));
        }
        if opts.nodes < 2 {
            return Err(Error::domain("nodes", format!("need J >= 2 atoms, got {}", opts.nodes)));
        }
        let (lo, hi) = support;
        if !(lo < hi) {
            return Err(Error::domain("support", "empty support interval"));
        }
        if !(opts.band > 0.0) {
            return Err(Error::domain("band", "frequency window must be positive"));
        }
        let j = opts.nodes;
        let spacing = (hi - lo) / j as f64;
        let width = opts.width_factor * spacing;
        let centers: Vec<f64> = (0..j).map(|i| lo + (i as f64 + 0.5) * spacing).collect();

        // Frequency nodes on t >= 0; the integrand is even in t.
        let rule = GaussLegendre::new(opts.quad_nodes);
        let split = opts.split.clamp(0.05, 0.95) * opts.band;
        let mut nodes: Vec<(f64, f64)> = rule.mapped(0.0, split).collect();
        nodes.extend(rule.mapped(split, opts.band));

        let n = samples.len() as f64;
        let mut g = vec![vec![0.0; j]; j];
        let mut b = vec![0.0; j];
        let mut c = 0.0;
        let mut row = vec![Complex64::new(0.0, 0.0); j];
        for &(t, wt) in &nodes {
            let (cs, sn) = samples
                .iter()
                .fold((0.0, 0.0), |(cs, sn), &x| (cs + (t * x).cos(), sn - (t * x).sin()));
            let phi = Complex64::new(cs / n, sn / n);
            let a = bump_transform(t * width);
            let ht = h.htilde_1d(t);
            for (r, cen) in row.iter_mut().zip(&centers) {
                *r = Complex64::from_polar(a, -t * cen) * ht;
            }
            let w2 = 2.0 * wt;
            for i in 0..j {
                for k in i..j {
                    g[i][k] += w2 * (row[i] * row[k].conj()).re;
                }
                b[i] += w2 * (row[i] * phi.conj()).re;
            }
            c += w2 * phi.norm_sqr();
        }
        for i in 0..j {
            for k in 0..i {
                g[i][k] = g[k][i];
            }
        }
        Ok(SieveProblem { centers, width, g, b, c })
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let mut q = self.c;
        for (i, wi) in w.iter().enumerate() {
            let gw: f64 = self.g[i].iter().zip(w).map(|(x, y)| x * y).sum();
            q += wi * gw - 2.0 * self.b[i] * wi;
        }
        q.max(0.0)
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.g
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| 2.0 * (row.iter().zip(w).map(|(x, y)| x * y).sum::<f64>() - bi))
            .collect()
    }

    /// Projected gradient from the uniform weights with step `1/(2 λ_max(G))`;
    /// stops once an iteration lowers the objective by no more than `tol`.
    /// Returns the weights and the objective after each iteration.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let j = self.centers.len();
        let lmax = power_iteration(&self.g);
        let step = if lmax > 0.0 { 1.0 / (2.0 * lmax) } else { 1.0 };
        let mut w = vec![1.0 / j as f64; j];
        let mut obj = self.objective(&w);
        let mut trace = vec![obj];
        loop {
            if trace.len() > max_iter {
                return Err(Error::NonConvergence {
                    iterations: max_iter,
                    objective: obj,
                    last_iterate: w,
                });
            }
            let grad = self.gradient(&w);
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(x, gx)| x - step * gx).collect();
            let next = simplex_projection(&trial);
            let next_obj = self.objective(&next);
            let decrease = obj - next_obj;
            w = next;
            obj = next_obj;
            trace.push(obj);
            if decrease <= tol {
                return Ok((w, trace));
            }
        }
    }
}

/// Fits the sieve and returns `p̂` together with `f̂ = h * p̂` on a grid of
/// spacing `dx`.
pub fn fit_minimum_distance(
    samples: &[f64],
    h: &NoiseModel,
    support: (f64, f64),
    opts: &FitOptions,
    dx: f64,
) -> Result<FitResult> {
    let problem = SieveProblem::new(samples, h, support, opts)?;
    let (weights, trace) = problem.solve(opts.tol, opts.max_iter)?;
    let mixing = SieveMixing {
        centers: problem.centers.clone(),
        weights,
        width: problem.width,
    };
    let (slo, shi) = mixing.support();
    let k_lo = (slo / dx).floor() as i64 - 1;
    let k_hi = (shi / dx).ceil() as i64 + 1;
    let count = ((k_hi - k_lo + 1) as usize).next_power_of_two().max(16);
    let grid = GridBox::with_spacing(vec![k_lo as f64 * dx], vec![dx], vec![count])?;
    let p_hat = mixing.sample_on(&grid);
    let hg = h.sample_on_grid(&[dx])?;
    let f_hat = convolve(&p_hat, &hg)?;
    Ok(FitResult {
        mixing,
        f_hat,
        p_hat,
        objective: *trace.last().unwrap(),
        iterations: trace.len() - 1,
        trace,
    })
}
