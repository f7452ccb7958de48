//! Relative extremal functions computed two ways: as plurisubharmonic
//! envelopes on grids and as infima over analytic discs.

// `!(a <= b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod envelope;
pub mod discs;
pub mod boundary;
pub mod capacity;
pub mod numeric;
pub mod rng;
pub mod harness;

pub use error::{Error, Result};
