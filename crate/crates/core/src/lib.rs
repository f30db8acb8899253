//! Fractional programming with the unified quadratic transform.
//!
//! The crate covers scalar max/min/mixed ratio surrogates ([`scalar`]), their
//! matrix-ratio extension ([`matrix`]), the generalized Lagrangian dual
//! transform for log-ratio objectives ([`dual`]), an MM driver with a
//! projected-gradient subproblem solver ([`solver`]) and three application
//! solvers ([`apps`]).
//!
//! Everything here is `no_std` + `alloc`. IO, configuration and timing live in
//! the companion `fracprog` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod apps;
pub mod dual;
mod error;
pub mod extended;
pub mod linalg;
pub mod matrix;
pub mod outer;
pub mod scalar;
pub mod solver;

pub use error::{FpError, Result};
pub use extended::{plus_part, ExtendedReal, PositivePart};
pub use outer::{Monotonicity, OuterFunction};

/// Default safeguard added to min-side auxiliary denominators.
pub const DEFAULT_EPS: f64 = 1e-12;
