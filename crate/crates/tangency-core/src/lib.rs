//! Numerical core for tangency experiments on Cantor-type sets.
//!
//! The crate builds multi-scale cube scaffolds with prescribed gap-width
//! schedules, layered functions whose gradient matches a given datum on the
//! limiting compact set, matrix-field representations of k-plane
//! distributions, and a family of Monte Carlo / quadrature estimators
//! (fractional seminorms, Hölder scans, box-counting slopes, circulation and
//! boundary-escape probes) used to verify the construction quantitatively.
//!
//! Everything here is pure computation over `f64` plus `alloc`; IO, file
//! formats and the command-line front end live in the companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN-rejecting comparisons and small fixed-index loops are deliberate in
// the numeric kernels.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod cutoff;
pub mod dist;
pub mod error;
pub mod fit;
pub mod geom;
pub mod linalg;
pub mod lusin;
pub(crate) mod math;
pub mod phase;
pub mod rng;
pub mod seminorm;
pub mod stokes;

pub use error::CoreError;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, CoreError>;
