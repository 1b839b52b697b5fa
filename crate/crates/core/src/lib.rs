//! Closed-form relations between the protocol and physical interference
//! models in Poisson wireless networks.
//!
//! Everything here is `no_std` (with `alloc`). The Monte Carlo oracle, file
//! formats and the command-line front end live in the `guardzone` crate.
//!
//! ```
//! use guardzone_core::{correlation, Model, ModelParams};
//!
//! let model = Model::new(ModelParams {
//!     n: 2,
//!     lambda: 2e-4,
//!     alpha: 3.0,
//!     beta: 5.0,
//!     r_t: 10.0,
//!     eta: 0.0,
//! })
//! .unwrap();
//! let best = correlation::chi_star(&model).unwrap();
//! assert!((best.chi - 2.08).abs() < 0.01);
//! ```
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod ilt;
pub mod quad;
pub mod roots;

pub mod correlation;
pub mod multi_obs;
pub mod nofading;
pub mod params;
pub mod risk;
pub mod single_obs;
pub mod specfn;

pub use error::{Error, Result};
pub use params::{DerivedParams, Model, ModelParams};
