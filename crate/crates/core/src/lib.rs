//! Numerical laboratory for the entropic central limit theorem.
//!
//! One-dimensional densities live on uniform grids ([`GridDensity`]); the
//! multivariate laws in scope are products of them ([`ProductMeasure`]).
//! On top of that the crate computes relative entropy, (relative) Fisher
//! information, Wasserstein-2 distances and Poincaré constants, evolves
//! densities along the Ornstein–Uhlenbeck flow, builds the density of the
//! normalized sum `Z_n` by FFT convolution, and checks the inequalities
//! relating all of these.
//!
//! Everything numerical is generic over [`Real`] (`f32`/`f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! stated tolerances assume.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod checks;
pub mod convolve;
pub mod distributions;
pub mod error;
pub mod fft;
pub mod functionals;
pub mod grid;
pub mod ou;
pub mod poincare;
pub mod projection;
pub mod quadrature;
pub mod scalar;
pub mod transport;

pub use distributions::DistributionSpec;
pub use error::{Error, Result};
pub use grid::{GridDensity, GridMeta, MomentSummary, ProductMeasure};
pub use scalar::Real;

/// `f64` grid density.
pub type Grid = GridDensity<f64>;
/// `f64` product measure.
pub type Product = ProductMeasure<f64>;
/// `f64` functional profile.
pub type Profile = functionals::InfoProfile<f64>;
