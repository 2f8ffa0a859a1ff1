use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// `log e` against `log x`.
    Algebraic,
    /// `log e` against `log log(1/x)`.
    Logarithmic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub scale: Scale,
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

impl RateFit {
    /// `slope ± z·stderr`.
    pub fn band(&self, z: f64) -> (f64, f64) {
        (self.slope - z * self.stderr, self.slope + z * self.stderr)
    }
}

/// Ordinary least squares with the usual slope standard error.
pub fn fit_rate(pairs: &[(f64, f64)], scale: Scale) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::domain("pairs", format!("need at least 3 pairs, got {}", pairs.len())));
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(x, e) in pairs {
        if !(x > 0.0 && e > 0.0) || !x.is_finite() || !e.is_finite() {
            return Err(Error::domain("pairs", format!("values must be positive, got ({x}, {e})")));
        }
        let lx = match scale {
            Scale::Algebraic => x.ln(),
            Scale::Logarithmic => {
                if x >= 1.0 {
                    return Err(Error::domain("pairs", format!("logarithmic scale needs x < 1, got {x}")));
                }
                (1.0 / x).ln().ln()
            }
        };
        xs.push(lx);
        ys.push(e.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("pairs", "x values do not vary"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(RateFit {
        scale,
        slope,
        stderr,
        intercept,
        points: pairs.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// `last / first <= 2`.
    pub non_diverging: bool,
}

pub fn upper_bound_check(errors: &[f64], bounds: &[f64]) -> BoundCheck {
    let ratios: Vec<f64> = errors.iter().zip(bounds).map(|(e, b)| e / b).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let non_diverging = match (ratios.first(), ratios.last()) {
        (Some(&f), Some(&l)) => l <= 2.0 * f,
        _ => false,
    };
    BoundCheck {
        ratios,
        max_ratio,
        non_diverging,
    }
}
