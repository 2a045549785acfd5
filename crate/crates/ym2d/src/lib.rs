// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod lattice_ym;
pub mod linalg;
pub mod master_field;
mod ode;
pub mod planar_loops;
pub mod rep_theory;
pub mod rng;
pub mod sphere_eq;
pub mod unitary_bm;

pub use error::{Error, Result};
