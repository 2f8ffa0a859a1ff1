//! Estimates `f̂ = h * p̂` of the mixture density: a sieve fit from samples
//! and an oracle that injects a perturbation of prescribed size.

mod inject;
mod sieve;

pub use inject::{oracle_inject, Injected, PerturbShape};
pub use sieve::{fit_minimum_distance, simplex_projection, FitOptions, FitResult, SieveMixing, SieveProblem};

use serde::Serialize;

use crate::error::Result;
use crate::numerics::{lp_distance, GridFunction, NormOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityMode {
    Measured,
    Injected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateQuality {
    pub u: NormOrder,
    pub a_n: f64,
    pub mode: QualityMode,
}

pub fn measure_quality(f_hat: &GridFunction, f_p: &GridFunction, u: NormOrder) -> Result<EstimateQuality> {
    Ok(EstimateQuality {
        u,
        a_n: lp_distance(f_hat, f_p, u)?,
        mode: QualityMode::Measured,
    })
}
