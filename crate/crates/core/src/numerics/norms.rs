use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use crate::error::{Error, Result};

/// Order `u` of an `L_u` norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NormOrder {
    Finite(f64),
    Infinity,
}

impl NormOrder {
    pub fn finite(u: f64) -> Result<Self> {
        if !(u >= 1.0) || !u.is_finite() {
            return Err(Error::domain("u", format!("norm order must be >= 1, got {u}")));
        }
        Ok(NormOrder::Finite(u))
    }
}

impl FromStr for NormOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" | "sup" => Ok(NormOrder::Infinity),
            other => {
                let u: f64 = other
                    .parse()
                    .map_err(|_| Error::domain("u", format!("cannot parse norm order `{s}`")))?;
                NormOrder::finite(u)
            }
        }
    }
}

impl TryFrom<String> for NormOrder {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NormOrder> for String {
    fn from(u: NormOrder) -> String {
        u.to_string()
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormOrder::Finite(u) => write!(f, "{u}"),
            NormOrder::Infinity => write!(f, "inf"),
        }
    }
}

fn lp_of(values: impl Iterator<Item = f64>, cell: f64, u: NormOrder) -> f64 {
    match u {
        NormOrder::Infinity => values.fold(0.0, f64::max),
        NormOrder::Finite(p) if p == 1.0 => values.sum::<f64>() * cell,
        NormOrder::Finite(p) if p == 2.0 => (values.map(|v| v * v).sum::<f64>() * cell).sqrt(),
        NormOrder::Finite(p) => (values.map(|v| v.powf(p)).sum::<f64>() * cell).powf(1.0 / p),
    }
}

/// `(Σ|f−g|^u · cell)^{1/u}`, or the maximum node difference for `u = ∞`.
pub fn lp_distance(f: &GridFunction, g: &GridFunction, u: NormOrder) -> Result<f64> {
    if let NormOrder::Finite(p) = u {
        NormOrder::finite(p)?;
    }
    f.check_compatible(g)?;
    Ok(lp_of(
        f.values().iter().zip(g.values()).map(|(a, b)| (a - b).norm()),
        f.cell(),
        u,
    ))
}

pub fn lp_norm(f: &GridFunction, u: NormOrder) -> Result<f64> {
    if let NormOrder::Finite(p) = u {
        NormOrder::finite(p)?;
    }
    Ok(lp_of(f.values().iter().map(|a| a.norm()), f.cell(), u))
}

/// `(∫(√p1 − √p2)²)^{1/2}`. Samples in `[-eps_mass, 0)` are read as zero.
pub fn hellinger(p1: &GridFunction, p2: &GridFunction) -> Result<f64> {
    hellinger_with_eps(p1, p2, super::grid::EPS_MASS)
}

pub fn hellinger_with_eps(p1: &GridFunction, p2: &GridFunction, eps_mass: f64) -> Result<f64> {
    p1.check_compatible(p2)?;
    let root = |v: f64| -> Result<f64> {
        if v < -eps_mass {
            return Err(Error::domain("density", format!("negative sample {v:e}")));
        }
        Ok(v.max(0.0).sqrt())
    };
    let mut acc = 0.0;
    for (a, b) in p1.values().iter().zip(p2.values()) {
        let d = root(a.re)? - root(b.re)?;
        acc += d * d;
    }
    Ok((acc * p1.cell()).sqrt())
}
