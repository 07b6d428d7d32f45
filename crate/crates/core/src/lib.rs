//! Regularization-correction (RC) subdivision for piecewise smooth data.
//!
//! The linear 4-point scheme smears and oscillates around singularities.
//! RC removes the singular part with one-sided cubic corrections estimated
//! from the data, subdivides what is left, and adds the corrections back.
//! Both point values and cell averages (through the primitive) are handled.

// `!(a > b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod detect;
pub mod error;
pub mod exec;
pub mod grid;
pub mod io;
pub mod jumps;
pub mod rc;
pub mod subdivision;
pub mod tensor2d;

pub use error::{Error, Result};
pub use exec::Execution;
