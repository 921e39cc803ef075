//! Numerical toolkit for boundary-triple functional models.
//!
//! Operators are represented only through their boundary data: a Weyl function
//! `M(z)` and extension parameters `(α, κ)`. From those the crate builds the
//! characteristic function `S(z)`, the Θ-calculus, a discretized Hardy-space
//! model, wave maps and scattering matrices.

// `!(x <= tol)` is used on purpose so that NaN lands in the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod chartheta;
pub mod hardy;
pub mod kernel;
pub mod scatter;
pub mod weyl;

pub use kernel::{CMatrix, Side, C64};
pub use weyl::{ExtensionParams, HerglotzModel, Point};
