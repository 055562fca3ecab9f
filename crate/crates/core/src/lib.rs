//! Numerical toolkit for the autoconvolution inequality `f >= f*f` on `R^d`.
//!
//! Every integrable solution is nonnegative, carries mass at most 1/2, and is
//! determined by its residual `u = f - f*f >= 0` through
//! `f = 1/2 sum c_n 4^n u^{*n}`, where `c_n` are the Taylor coefficients of
//! `sqrt(1 - x)`. This crate builds such solutions on grids, checks them, and
//! measures the tail behavior that separates the critical mass 1/2 from the
//! subcritical case.
//!
//! - [`coeff`]: the coefficients `c_n` and certified tail bounds.
//! - [`grid`]: sampled functions, quadrature, linear convolution, transforms.
//! - [`families`]: closed-form oracles (Poisson kernel, sinc, heavy tail).
//! - [`construct`]: series and spectral constructions from a residual.
//! - [`analyze`]: verification, moments, tail fits.
//! - [`clt`]: escape of mass for infinite-variance sums.

pub mod analyze;
pub mod clt;
pub mod coeff;
pub mod construct;
pub mod error;
pub mod families;
pub mod grid;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
