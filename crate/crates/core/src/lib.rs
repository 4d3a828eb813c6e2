//! Numerical laboratory for the defocusing cubic NLS with a spatially varying
//! nonlinearity coefficient: split-step simulation, WKB wave-packet
//! approximations, and recovery of the coefficient from packet phases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod config;
pub mod error;
pub mod fields;
pub mod harness;
pub mod profiles;
pub mod recovery;
pub mod solver;
pub mod xray;

pub use error::{Error, Result};
