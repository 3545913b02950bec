//! Simulation of open bipartite system–environment dynamics together with two
//! families of memory diagnostics: trace-distance revivals with their
//! backflow bound, and conditional past-future (CPF) correlations of three
//! successive projective measurements.
//!
//! Conventions fixed across the crate:
//!
//! * Operators are vectorized by column stacking, `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
//! * Composite Hilbert spaces are ordered `system ⊗ environment`.
//! * Time is measured in units of `1/γ` by the command-line front end.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod evolve;
pub mod models;
pub mod qcore;
pub mod validate;
pub mod witness;

pub use error::{QflowError, Result};

/// Library version embedded in generated CSV headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
