//! Simulation oracle, file formats and command-line front end for
//! [`guardzone_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use guardzone_core as core;

pub mod cli;
pub mod io;
pub mod montecarlo;
pub mod validation;
