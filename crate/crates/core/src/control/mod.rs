//! Cascaded balancing, steering, distance and motor loops plus the command
//! mixer.

mod mixer;
mod pid;
mod suite;

pub use mixer::{mix_commands, mixed_rate};
pub use pid::{pid_step, PidGains, PidMemory};
pub use suite::{wrap_angle, ControlGains, ControllerSuite, SensorFrame};
