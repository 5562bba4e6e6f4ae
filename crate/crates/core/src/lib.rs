//! Radially symmetric simulation of a chemotaxis system in which the
//! attractant is produced indirectly, through an intermediate species.
//!
//! The solver is a cell-centered finite-volume scheme on a ball, stepped
//! with IMEX Euler. Around it sit the energy functionals, a concentrated
//! initial-data family, a comparison ODE for blowup-time bounds, reference
//! oracles and a small file-oriented runner.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod config;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod initial_data;
pub mod model;
pub mod oracles;
pub mod runner;
pub mod stepper;
pub mod tridiag;

pub use error::{Error, Result};
