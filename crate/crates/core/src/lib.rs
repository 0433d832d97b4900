//! Multi-measurement noise spectroscopy of a dephasing qubit.
//!
//! Filters built from measurement protocols, Gaussian and Monte Carlo
//! evaluation of multi-time correlators, comb spectroscopy with spectrum
//! reconstruction, and non-Gaussianity witnesses.

pub mod error;
pub mod filters;
pub mod gaussian;
pub mod montecarlo;
pub mod nnls;
pub mod noise;
pub mod nongaussian;
pub mod quadrature;
pub mod rng;
pub mod spectroscopy;
pub mod spectrum;

pub use error::{Error, Result};
