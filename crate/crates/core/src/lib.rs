//! Numerical toolkit for the soft edge of deformed sample covariance matrices.
//!
//! The crate is split into four layers:
//!
//! - [`deformed_mp`]: the deformed Marchenko-Pastur law for a diagonal
//!   population (Stieltjes transform, density, support, soft edge data and
//!   classical eigenvalue locations).
//! - [`tracy_widom`]: Tracy-Widom distribution functions `F1` and `F2` via
//!   Fredholm determinants of Airy-type kernels.
//! - [`matrix_lab`]: entry distributions, reproducible sampling, dense
//!   singular value / Lanczos eigensolvers and the linearized resolvent.
//! - [`harness`]: Monte Carlo experiments for edge universality, the
//!   large-entry probe, rigidity, local laws and the entry cutoff.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deformed_mp;
pub mod error;
pub mod harness;
pub mod matrix_lab;
pub mod quadrature;
pub mod tracy_widom;

pub use error::{Error, Result};
