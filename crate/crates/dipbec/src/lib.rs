//! Gaussian variational toolkit for dipolar Bose-Einstein condensates.
//!
//! The dipolar Gross-Pitaevskii mean field restricted to an axisymmetric
//! Gaussian trial state reduces to two complex width parameters. This crate
//! computes, in the particle-number-scaled dipole units:
//!
//! * stationary branches (ground and collectively excited states), their
//!   tangent bifurcation and the critical scattering length ([`stationary`]);
//! * the analytic continuation to complex scattering lengths that certifies
//!   the bifurcation as an exceptional point ([`exceptional`]);
//! * time evolution of the width parameters, collapse detection and linear
//!   stability ([`dynamics`]);
//! * Poincaré surfaces of section of the width dynamics ([`poincare`]);
//! * unit conversions from laboratory parameters ([`units`]).
//!
//! Each capability has a runnable example under `examples/`; the `dipbec`
//! binary exposes the same operations as subcommands with CSV/JSON output.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod exceptional;
mod la;
pub mod meanfield;
pub mod ode;
pub mod poincare;
pub mod stationary;
pub mod units;

pub use error::Error;
pub use meanfield::{Couplings, EnergyBreakdown, WidthVector};
pub use units::{AtomSpec, TrapParams};
