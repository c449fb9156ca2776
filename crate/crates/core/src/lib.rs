//! Simulation and verification of monotone skew-product semiflows driven by
//! quasi-periodic reaction-diffusion equations.
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod group;
pub mod lab;
pub mod orbit;
pub mod profile;
pub mod quasi_periodic;
pub mod reaction;
pub mod semiflow;
pub mod verify;

pub use error::{LabError, Result};
