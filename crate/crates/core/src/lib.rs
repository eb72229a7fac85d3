//! Boundary-perturbation expansions and honesty diagnostics for
//! collisionless transport semigroups.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod convergence;
pub mod density;
pub mod error;
pub mod expansion;
pub mod geometry;
pub mod honesty;
pub mod scenario;
pub mod steps;

pub use error::{Error, Result};
