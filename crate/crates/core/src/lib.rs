//! Harmonic moments, the string equation and Hele-Shaw evolution for
//! polynomial and rational maps of the unit disk.

// `!(x > limit)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bracket_jacobian;
pub mod cli_io;
pub mod cplx_fn;
pub mod error;
pub mod evolution;
pub mod moments;
pub mod scenarios;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
