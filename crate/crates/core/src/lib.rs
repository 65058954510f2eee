//! Slotted-time simulation and analysis of wireless link scheduling policies
//! that trade queue length against service regularity.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod lp;
pub mod model;
pub mod policies;
pub mod schedule_space;
pub mod stats;

pub use error::{Error, Result};
