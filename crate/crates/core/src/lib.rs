//! Spectral solvers for the quantum Rabi model
//! `H = ω a†a + g σx (a + a†) + Δ σz`.
//!
//! Two continued-fraction routes are provided:
//!
//! * [`schweber`]: the Bargmann-space coefficient recurrence and its finite
//!   continued fraction `f0(E) = F_N(E)`, which does not resolve parity.
//! * [`resolvent`]: the resolvent continued fraction `G0(E)` of a truncated
//!   parity chain, whose poles are the chain eigenvalues.
//!
//! [`tridiag`] is an independent Sturm-bisection eigensolver used as the
//! reference for both. [`pathological`] builds the modified truncation that
//! plants an arbitrary eigenvalue, [`convergence`] holds the tail-depth bound
//! and Pringsheim certificates, and [`search`] contains the root bracketing,
//! Brent refinement and the level-crossing scan.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod convergence;
pub mod error;
pub mod model;
pub mod pathological;
pub mod resolvent;
pub mod schweber;
pub mod search;
pub mod spectrum;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{build_chain, shifted_energy, ChainCoefficients, ModelParams, Parity, TruncationOrder};
pub use spectrum::{Level, Method, SpectrumApproximation};

/// Denominators smaller than this in magnitude are treated as poles.
pub const DEN_FLOOR: f64 = 1e-300;

/// Relative width of the guard interval around `x(E) = nω` (times ω).
pub const DEFAULT_POLE_GUARD: f64 = 1e-9;

/// Default bisection tolerance of the eigensolver (times ω).
pub const DEFAULT_EIG_TOL: f64 = 1e-11;
