//! Omni Differential Drive: kinematics, dynamics, control and simulation.

// NaN must fail validation, so bounds are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod mecanum;
pub mod service;
pub mod sim;
pub mod verify;

pub use error::{OddError, Result};
