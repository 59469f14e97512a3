//! Strong approximation of scalar SDEs driven by fractional Brownian motion
//! with Hurst parameter H > 1/2.
//!
//! The crate provides exact fBm samplers (Cholesky and circulant embedding),
//! a small coefficient-expression language with symbolic derivatives, the
//! Lamperti reduction, the Euler / Wong-Zakai / McShane schemes, the analytic
//! error constants (zeta values, kernel sums, weight process) and a Monte
//! Carlo convergence-study harness.

pub mod analysis;
pub mod coeff;
pub mod error;
pub mod fbm;
pub mod harness;
pub mod model;
pub mod quad;
pub mod rng;
pub mod schemes;

pub use error::{Error, Result};
pub use fbm::{FbmPath, Hurst, TimeGrid};
pub use model::SdeProblem;
