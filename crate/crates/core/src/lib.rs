//! Numerical laboratory for parabolic potential theory on non-cylindrical space-time domains.

// Argument checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod capacity;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod scenarios;
mod serde_float;
pub mod walker;
