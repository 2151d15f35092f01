//! Spectral solvers for the parabolic Anderson model `u_t = u_xx + ε u · Ẇ(x)`
//! on (0, π) with zero boundary values, in both the Wick (Skorokhod) and the
//! Stratonovich interpretation, together with the deterministic correction
//! that separates them at order ε².
//!
//! Layout:
//! - [`spectral`]: sine basis, heat semigroup, Sobolev norms, mode couplings;
//! - [`noise`]: seeded truncated white noise, Hermite polynomials, `ξ_α`;
//! - [`wick`]: chaos propagator table and the Wick series;
//! - [`strat`]: Galerkin flow and Dyson series for the Stratonovich model;
//! - [`correction`]: the ε² correction field and its building blocks;
//! - [`harness`]: ε-ladder experiments, reports and the CLI plumbing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correction;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod noise;
pub mod quadrature;
pub mod spectral;
pub mod strat;
pub mod wick;

pub use error::{Error, Result};
pub use noise::{MultiIndex, NoiseRealization};
pub use spectral::{SineBasis, SpectralField};
pub use strat::GalerkinSystem;
pub use wick::PropagatorTable;
