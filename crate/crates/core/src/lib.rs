//! Interpretable embedding axes: whitening, independent component rotation,
//! per-axis similarity decomposition and the tooling around them.

// `!(x > 0.0)` is used deliberately so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod retrieval;
pub mod select;
pub mod transform;

pub use error::{Error, Result};
