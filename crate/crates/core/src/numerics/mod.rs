//! Grid functions on boxes in R^d, the continuous-convention Fourier pair,
//! linear convolution, `L_u` distances and quadrature.

mod convolve;
mod csvio;
mod fourier;
mod grid;
mod norms;
pub mod quad;

pub use convolve::convolve;
pub use csvio::{fmt_f64, read_grid_csv, write_grid_csv};
pub use fourier::{apply_multiplier, fourier, inverse_fourier, parseval_constant};
pub use grid::{Domain, GridBox, GridFunction, EPS_MASS};
pub use norms::{hellinger, hellinger_with_eps, lp_distance, lp_norm, NormOrder};
