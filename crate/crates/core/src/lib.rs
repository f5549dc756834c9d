//! Quasi-static model of a pneumatic soft hand whose single source flow
//! drives both finger bending and lubricant injection.
//!
//! A lever mechanism splits the source flow between the finger line and an
//! injection line, blocking the finger line above a switching flow. A Venturi
//! orifice on the injection line lifts lubricant onto the finger surface
//! once its suction clears the supply-tube height. The crate evaluates each
//! stage, composes them into time-stepped scenarios, searches design
//! parameters for target thresholds, and re-derives the measured prototype
//! table.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod curve;
pub mod design;
pub mod error;
pub mod fcs;
pub mod finger;
pub mod hand;
pub mod scenario;
pub mod search;
pub mod sweep;
pub mod system;
pub mod table1;
pub mod units;
pub mod venturi;

pub use error::{Error, Result};
pub use system::SystemConfig;
