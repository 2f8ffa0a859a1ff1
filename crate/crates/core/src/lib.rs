//! Plug-in deconvolution of mixing densities.
//!
//! Given an estimate `f̂ = h * p̂` of a mixture density `f_p = h * p`, the crate
//! builds the mixing-density estimate `K_b * p̂` and its derivatives, the
//! Fourier-ratio filters `ψ_n` and `ψ_n*`, the zero-regularized transfer for
//! oscillatory noise, bandwidth plans per noise family, and Monte Carlo rate
//! studies that compare measured error exponents with predicted ones.

pub mod error;
pub mod numerics;
pub mod rng;

pub mod kernels;
pub mod noise;
pub mod specstr;
pub mod targets;
pub mod estimator;
pub mod deconv;
pub mod manifest;
pub mod rates;
pub mod cli;

pub use error::{Error, Result};
