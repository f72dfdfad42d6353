//! Simulation of a decaying two-level atom continuously observed through a
//! two-state apparatus.
//!
//! * [`qmat`]: dense complex matrices and kets.
//! * [`atom`]: decay operator, unitary dilation, master equation.
//! * [`chainspace`]: Fock-space evaluations on chains of event times and
//!   expectation engines (count-reduced quadrature, Monte Carlo).
//! * [`filtering`]: observation records, conditional expectations and the
//!   counting-driven filter.
//! * [`belavkin`]: pseudo-Hilbert (triangular) representation of the
//!   dilation and the star-quadratic form of the master equation.

pub mod atom;
pub mod belavkin;
pub mod chainspace;
pub mod error;
pub mod filtering;
pub mod parallel;
pub mod qmat;

pub use error::{Error, Result};
