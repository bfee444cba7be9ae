//! Downlink model of a GEO satellite assisted by a reconfigurable intelligent
//! surface, with a mesh adaptive direct search optimizer for joint
//! per-subcarrier power allocation and surface phase design.

// `!(x <= tol)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod checks;
pub mod error;
pub mod harness;
pub mod mads;
pub mod signal;

pub use error::{Error, Result};
