//! Dual ground states of the nonlinear fractional Helmholtz equation
//!
//! ```text
//! (-Δ)^s u - k² u = Q(x) |u|^{p-2} u   in R^N
//! ```
//!
//! computed in the rescaled frame `x ↦ x/k`, where the problem becomes
//! `(-Δ)^s u - u = Q(εx) |u|^{p-2} u` with `ε = 1/k`. Solutions are obtained
//! from critical points of the dual energy
//!
//! ```text
//! J_ε(v) = 1/p' ∫|v|^{p'} - 1/2 ∫ Q_ε^{1/p} v · R^s(Q_ε^{1/p} v)
//! ```
//!
//! where `R^s` is the real (principal value) part of the fractional Helmholtz
//! resolvent, realised as a Fourier multiplier on a periodic box.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel fan-out live in the `dualhelm` crate.
//!
//! Module map:
//! - [`grid`], [`fft`], [`spectral`]: periodic grid, transforms, quadrature.
//! - [`resolvent`]: the multiplier `R^s`, its kernel and decay diagnostics.
//! - [`coefficient`], [`dual`], [`solver`]: the dual functional, Nehari
//!   projection and the ground state solver.
//! - [`lab`]: concentration experiments (sweeps over k, level tables).
#![no_std]

extern crate alloc;

pub mod coefficient;
pub mod dual;
pub mod error;
pub mod exponents;
pub mod fft;
pub mod grid;
pub mod lab;
pub mod resolvent;
pub mod solver;
pub mod spectral;
mod util;

pub use coefficient::{CoefficientQ, QFamily};
pub use dual::{DualFunctional, DualState};
pub use error::{Error, Result};
pub use exponents::{Exponents, HypothesisCheck};
pub use grid::{Point, TorusGrid};
pub use lab::{LevelRow, LevelTable, Sweep, SweepRecord};
pub use resolvent::{BandCutoff, KernelBundle, ResolventSpec};
pub use solver::{GroundState, SolverOptions};
pub use spectral::{Multiplier, RealField, SpectralField};
